"""
Utility functions for reading and writing sequence files and JSON documents
"""
import json
import logging
import os
from typing import Any, Tuple

from errors import OutputError, ParameterError
from quotients import Params
from sequences import BinarySequence

logger = logging.getLogger(__name__)

SEQUENCE_MAGIC = "ESEQ1"
SEQUENCE_FORMATS = ("ascii", "bin", "json")


def write_to_file(file_path: str, content: Any) -> None:
    """
    Write text or bytes to a file, creating the parent directory if needed.

    Args:
        file_path (str): Path to the file to write
        content (str | bytes): Content to write to the file
    """
    mode = "wb" if isinstance(content, (bytes, bytearray)) else "w"
    try:
        parent = os.path.dirname(file_path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        if mode == "wb":
            with open(file_path, mode) as f:
                f.write(content)
        else:
            with open(file_path, mode, encoding="utf-8", newline="\n") as f:
                f.write(content)
        logger.info("Successfully wrote content to %s", file_path)
    except OSError as e:
        logger.error("Error writing to file %s: %s", file_path, e)
        raise OutputError(f"cannot write {file_path}: {e}") from e


def _header(seq: BinarySequence) -> str:
    if seq.params is None:
        raise ParameterError("sequence files need the (p, r) parameters")
    return f"{SEQUENCE_MAGIC} p={seq.params.p} r={seq.params.r_frak} n={len(seq)}"


def encode_sequence(seq: BinarySequence, fmt: str = "ascii") -> bytes:
    """
    ESEQ1 encoding: one header line, then either one 0/1 per line (ascii), the bits packed
    little-endian within each byte (bin: bit u is bit u % 8 of byte u // 8), or a JSON object.
    """
    if fmt not in SEQUENCE_FORMATS:
        raise ParameterError(f"unknown format {fmt!r}, expected one of {', '.join(SEQUENCE_FORMATS)}")
    if fmt == "json":
        document = {
            "format": SEQUENCE_MAGIC,
            "p": seq.params.p if seq.params else None,
            "r": seq.params.r_frak if seq.params else None,
            "n": len(seq),
            "bits": seq.to_string(),
        }
        return (json.dumps(document) + "\n").encode("ascii")
    header = (_header(seq) + "\n").encode("ascii")
    if fmt == "ascii":
        return header + "".join(f"{bit}\n" for bit in seq.bits).encode("ascii")
    packed = bytearray((len(seq) + 7) // 8)
    for u, bit in enumerate(seq.bits):
        if bit:
            packed[u // 8] |= 1 << (u % 8)
    return header + bytes(packed)


def _parse_header(line: bytes) -> Tuple[int, int, int]:
    fields = line.decode("ascii", errors="replace").split()
    if len(fields) != 4 or fields[0] != SEQUENCE_MAGIC:
        raise ParameterError(f"not an {SEQUENCE_MAGIC} header: {line[:40]!r}")
    try:
        values = dict(field.split("=", 1) for field in fields[1:])
        return int(values["p"]), int(values["r"]), int(values["n"])
    except (KeyError, ValueError):
        raise ParameterError(f"malformed {SEQUENCE_MAGIC} header: {line[:40]!r}") from None


def decode_sequence(data: bytes) -> BinarySequence:
    """Inverse of encode_sequence; ascii or bin is told apart by the body length."""
    if data.lstrip().startswith(b"{"):
        try:
            document = json.loads(data)
            params = Params(p=document["p"], r_frak=document["r"])
            bits = tuple(int(c) for c in document["bits"])
        except (KeyError, ValueError) as e:
            raise ParameterError(f"malformed JSON sequence: {e}") from e
        if len(bits) != document.get("n", len(bits)):
            raise ParameterError("JSON sequence length does not match n")
        return BinarySequence(bits=bits, asserted_period=params.period, params=params)
    head, newline, body = data.partition(b"\n")
    if not newline:
        raise ParameterError("sequence file has no header line")
    p, r, n = _parse_header(head)
    params = Params(p=p, r_frak=r)
    if len(body) == (n + 7) // 8 and len(body) != 2 * n:
        bits = tuple((body[u // 8] >> (u % 8)) & 1 for u in range(n))
    else:
        lines = body.decode("ascii", errors="replace").split()
        if len(lines) != n or any(line not in ("0", "1") for line in lines):
            raise ParameterError(f"ascii body does not hold {n} bits")
        bits = tuple(int(line) for line in lines)
    return BinarySequence(bits=bits, asserted_period=params.period, params=params)


def write_sequence(file_path: str, seq: BinarySequence, fmt: str = "ascii") -> None:
    write_to_file(file_path, encode_sequence(seq, fmt))


def read_sequence(file_path: str) -> BinarySequence:
    try:
        with open(file_path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise OutputError(f"cannot read {file_path}: {e}") from e
    return decode_sequence(data)


def dump_json(document: Any) -> str:
    """Stable JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def write_json(file_path: str, document: Any) -> None:
    write_to_file(file_path, dump_json(document))
