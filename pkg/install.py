#!/usr/bin/env python3
"""
Installation script for the Incident Desk
"""
import os
import sys
import subprocess
import platform
from pathlib import Path


def check_python_version():
    """Check if Python version is 3.9 or higher"""
    major, minor = sys.version_info[:2]
    if major < 3 or (major == 3 and minor < 9):
        print("Error: Python 3.9 or higher is required")
        return False
    return True


def venv_python():
    if platform.system() == "Windows":
        return os.path.join("venv", "Scripts", "python.exe")
    return os.path.join("venv", "bin", "python")


def run_step(description, command):
    print(f"{description}...")
    try:
        subprocess.check_call(command)
        return True
    except (subprocess.CalledProcessError, FileNotFoundError):
        print(f"Error: {description} failed")
        return False


def create_work_dirs():
    """Create the default knowledge-store and report directories"""
    for name in ("kb", "reports"):
        path = Path(name)
        if not path.exists():
            path.mkdir()
            print(f"Created {name}/ directory")


def check_endpoint():
    if not os.environ.get("INCIDENT_DESK_ENDPOINT"):
        print("Note: INCIDENT_DESK_ENDPOINT is not set; only the scripted backend will work.")


def main():
    """Main installation function"""
    print("=" * 60)
    print("Incident Desk - Installation")
    print("=" * 60)

    os.chdir(os.path.dirname(os.path.abspath(__file__)))

    if not check_python_version():
        return False
    if not run_step("Creating virtual environment", [sys.executable, "-m", "venv", "venv"]):
        return False
    if not os.path.exists(venv_python()):
        print(f"Error: Virtual environment Python executable not found at {venv_python()}")
        return False
    if not run_step("Installing requirements", [venv_python(), "-m", "pip", "install", "-r", "requirements.txt"]):
        return False
    if not run_step("Installing the package", [venv_python(), "-m", "pip", "install", "-e", "."]):
        return False

    create_work_dirs()
    check_endpoint()

    print("\nInstallation completed successfully!")
    print("\nTo run the desk:")
    if platform.system() == "Windows":
        print("  venv\\Scripts\\incident-desk --help")
    else:
        print("  source venv/bin/activate")
        print("  incident-desk --help")
    return True


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
