"""
File utility functions for the incident desk
"""
import os
import json
import logging


MODALITY_KEYWORDS = {
    "metrics": ("metric", "kpi"),
    "logs": ("log",),
    "traces": ("trace", "span"),
}


def get_file_type(file_path):
    """
    Determine which telemetry modality a data file holds

    Args:
        file_path (str): Path to the file

    Returns:
        str: 'metrics', 'logs', 'traces' or 'unknown'
    """
    base_name = os.path.basename(file_path).lower()
    extension = os.path.splitext(base_name)[1].replace(".", "")
    if extension not in {"jsonl", "csv"}:
        return "unknown"

    for modality, keywords in MODALITY_KEYWORDS.items():
        if any(keyword in base_name for keyword in keywords):
            return modality
    return "unknown"


def get_output_path(output_dir, case_id, attempt, extension):
    """
    Generate the report path for one diagnosis attempt

    Args:
        output_dir (str): Root output directory
        case_id (str): Incident case identifier
        attempt (int): 1-based attempt number
        extension (str): "json" or "txt"

    Returns:
        str: <output_dir>/<case_id>/attempt-<n>/report.<extension>
    """
    extension = extension.lower().replace(".", "")
    return os.path.join(output_dir, str(case_id), f"attempt-{attempt}", f"report.{extension}")


def create_directory_if_not_exists(directory):
    """
    Create a directory if it doesn't already exist

    Args:
        directory (str): Path to the directory to create

    Returns:
        bool: True if directory exists or was created successfully, False otherwise
    """
    try:
        if directory and not os.path.exists(directory):
            os.makedirs(directory)
        return True
    except OSError as e:
        logging.error(f"Error creating directory {directory}: {str(e)}")
        return False


def iter_jsonl(file_path):
    """
    Yield (line_number, raw_bytes) for every non-blank line

    Lines stay undecoded so one bad UTF-8 sequence only spoils its own row.
    """
    with open(file_path, "rb") as fh:
        for line_number, line in enumerate(fh, start=1):
            if line.strip():
                yield line_number, line


def read_jsonl(file_path):
    """Read a line-delimited JSON file into a list of dicts"""
    return [json.loads(line.decode("utf-8")) for _, line in iter_jsonl(file_path)]


def dumps_record(record):
    """Serialize one record the way every line-delimited artifact is written"""
    return json.dumps(record, sort_keys=True, ensure_ascii=False)


def write_jsonl(file_path, records, append=False):
    """
    Write records as line-delimited JSON

    Args:
        file_path (str): Destination file
        records (iterable): JSON-serialisable dicts
        append (bool): Append instead of truncating

    Returns:
        int: Number of records written
    """
    create_directory_if_not_exists(os.path.dirname(file_path))
    count = 0
    with open(file_path, "a" if append else "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(dumps_record(record) + "\n")
            count += 1
    return count
