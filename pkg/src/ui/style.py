"""
Console styling for the incident desk command line
"""
from colorama import Fore, Style, init


init()

STATUS_COLORS = {
    "info": Fore.CYAN,
    "ok": Fore.GREEN,
    "warn": Fore.YELLOW,
    "error": Fore.RED,
}


def styled(text, kind="info"):
    return f"{STATUS_COLORS.get(kind, '')}{text}{Style.RESET_ALL}"


def status(text, kind="info"):
    """Print one operator-facing status line"""
    print(styled(text, kind))


def banner(title):
    rule = "=" * 60
    print(styled(rule, "info"))
    print(styled(title, "info"))
    print(styled(rule, "info"))
