"""Function signature database: text signature <-> 4-byte selector, plus phrases.

On disk the database is a UTF-8 text file with one tab-separated record per
line::

    <8-hex-selector> TAB <text_sig> TAB <source> [TAB <phrase>]

``source`` is one of ``abi``, ``lines``, ``ercdoc``, ``devdoc`` or
``swum-cache``.  Phrases escape backslash, tab and newline as ``\\\\``,
``\\t`` and ``\\n``.  Several lines may describe the same signature; they are
merged on load.  Every line's selector is re-derived from its signature when
loading and mismatching lines are rejected.
"""

from __future__ import annotations

import json
import logging
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .keccak import keccak256

log = logging.getLogger(__name__)

SOURCES = ("abi", "lines", "ercdoc", "devdoc", "swum-cache")
PHRASE_PRIORITY = {"ercdoc": 0, "devdoc": 1, "swum-cache": 2}


class CanonicalizationError(ValueError):
    def __init__(self, message: str, hint: str | None = None):
        super().__init__(message if hint is None else f"{message} (hint: {hint})")
        self.hint = hint


class SigImportError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = "" if line is None else f" at line {line}" + ("" if column is None else f", column {column}")
        super().__init__(message + where)
        self.line = line
        self.column = column


# ---------------------------------------------------------------------------
# canonicalization

_TOKEN = re.compile(r"\s*(?:([A-Za-z0-9_$]+)|(.))")
_IDENT = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*\Z")
_ALIASES = {
    "uint": "uint256",
    "int": "int256",
    "fixed": "fixed128x18",
    "ufixed": "ufixed128x18",
    "byte": "bytes1",
}
_MODIFIERS = {"memory", "calldata", "storage", "indexed", "payable"}


def _check_base(t: str) -> str:
    t = _ALIASES.get(t, t)
    if t in ("address", "bool", "string", "bytes", "function"):
        return t
    m = re.fullmatch(r"(u?int)(\d+)", t)
    if m:
        n = int(m.group(2))
        if 8 <= n <= 256 and n % 8 == 0:
            return t
        raise CanonicalizationError(f"bad integer width in {t!r}", "use a multiple of 8 between 8 and 256")
    m = re.fullmatch(r"bytes(\d+)", t)
    if m:
        if 1 <= int(m.group(1)) <= 32:
            return t
        raise CanonicalizationError(f"bad bytes width in {t!r}", "use bytes1..bytes32 or bytes")
    m = re.fullmatch(r"(u?fixed)(\d+)x(\d+)", t)
    if m:
        return t
    raise CanonicalizationError(f"unknown type {t!r}")


class _Parser:
    def __init__(self, text: str):
        self.toks = []
        for m in _TOKEN.finditer(text):
            if m.group(1):
                self.toks.append(m.group(1))
            elif m.group(2) and not m.group(2).isspace():
                self.toks.append(m.group(2))
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expect: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise CanonicalizationError("unexpected end of signature", "check for a missing ')'")
        if expect is not None and tok != expect:
            raise CanonicalizationError(f"expected {expect!r}, found {tok!r}")
        self.i += 1
        return tok

    def type_list(self) -> str:
        self.take("(")
        parts = []
        if self.peek() != ")":
            while True:
                parts.append(self.param())
                if self.peek() == ",":
                    self.take()
                    continue
                break
        self.take(")")
        return "(" + ",".join(parts) + ")"

    def param(self) -> str:
        if self.peek() == "(":
            t = self.type_list()
        else:
            tok = self.take()
            if not _IDENT.match(tok):
                raise CanonicalizationError(f"unexpected {tok!r} in parameter list")
            if tok == "tuple":
                raise CanonicalizationError("bare 'tuple' type", "expand tuple components as (type1,type2)")
            t = _check_base(tok)
        while self.peek() == "[":
            self.take()
            size = ""
            if self.peek() not in ("]", None):
                size = self.take()
                if not size.isdigit() or int(size) == 0:
                    raise CanonicalizationError(f"bad array size {size!r}")
            self.take("]")
            t += f"[{size}]"
        # parameter names and data-location keywords are dropped
        while self.peek() not in (",", ")", None):
            tok = self.take()
            if not _IDENT.match(tok):
                raise CanonicalizationError(f"unexpected {tok!r} after type {t!r}")
        return t


def canonicalize(sig: str) -> str:
    """Canonical text signature: no names, no spaces, expanded type aliases."""
    p = _Parser(sig)
    name = p.take()
    if not _IDENT.match(name):
        raise CanonicalizationError(f"bad function name {name!r}")
    if p.peek() != "(":
        raise CanonicalizationError(f"missing parameter list in {sig!r}", f"write {name}()")
    params = p.type_list()
    if p.peek() is not None:
        raise CanonicalizationError(f"trailing text {p.peek()!r} in {sig!r}")
    return name + params


def keccak_selector(text_sig: str) -> bytes:
    canon = canonicalize(text_sig)
    if canon != text_sig:
        raise CanonicalizationError(f"{text_sig!r} is not canonical", f"use {canon!r}")
    return keccak256(text_sig.encode("ascii"))[:4]


def selector_int(text_sig: str) -> int:
    return int.from_bytes(keccak_selector(text_sig), "big")


def parse_selector(value: int | bytes | str) -> int:
    if isinstance(value, int):
        return value
    if isinstance(value, bytes):
        return int.from_bytes(value, "big")
    s = value.strip().lower()
    s = s[2:] if s.startswith("0x") else s
    if not re.fullmatch(r"[0-9a-f]{1,8}", s):
        raise ValueError(f"bad selector {value!r}")
    return int(s, 16)


def abi_type(entry: dict) -> str:
    """Canonical type string for one ABI ``inputs`` item (tuples expanded)."""
    t = entry["type"]
    if t.startswith("tuple"):
        inner = ",".join(abi_type(c) for c in entry.get("components", []))
        return f"({inner}){t[len('tuple'):]}"
    base, _, rest = t.partition("[")
    return _check_base(base) + (f"[{rest}" if rest else "")


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class Phrase:
    text: str
    source: str
    weight: float = 1.0


@dataclass
class SignatureRecord:
    text_sig: str
    selector: int
    phrases: list[Phrase] = field(default_factory=list)
    sources: set[str] = field(default_factory=set)

    @property
    def selector_hex(self) -> str:
        return f"0x{self.selector:08x}"


def _escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _unescape(s: str) -> str:
    return re.sub(r"\\(.)", lambda m: {"t": "\t", "n": "\n"}.get(m.group(1), m.group(1)), s)


class SigDatabase:
    def __init__(self):
        self._by_sig: dict[str, SignatureRecord] = {}
        self._by_selector: dict[int, list[SignatureRecord]] = {}
        self._lock = threading.Lock()
        self.warnings: list[str] = []
        self.rejected: list[str] = []

    def __len__(self) -> int:
        return len(self._by_sig)

    def __contains__(self, text_sig: str) -> bool:
        return text_sig in self._by_sig

    def get(self, text_sig: str) -> SignatureRecord | None:
        return self._by_sig.get(text_sig)

    def records(self) -> list[SignatureRecord]:
        return [self._by_sig[k] for k in sorted(self._by_sig)]

    def counts_by_source(self) -> dict[str, int]:
        counts = {s: 0 for s in SOURCES}
        for rec in self._by_sig.values():
            for s in rec.sources:
                counts[s] += 1
        return counts

    # ---- writes
    def add(self, text_sig: str, source: str, phrase: str | None = None, weight: float = 1.0) -> bool:
        """Insert a signature (and optionally a phrase); True if the signature is new."""
        if source not in SOURCES:
            raise ValueError(f"unknown source {source!r}")
        canon = canonicalize(text_sig)
        with self._lock:
            rec = self._by_sig.get(canon)
            new = rec is None
            if new:
                rec = SignatureRecord(canon, selector_int(canon))
                self._by_sig[canon] = rec
                self._by_selector.setdefault(rec.selector, []).append(rec)
            rec.sources.add(source)
            if phrase:
                p = Phrase(phrase, source, weight)
                if all(q.text != p.text or q.source != p.source for q in rec.phrases):
                    rec.phrases.append(p)
            return new

    def import_abi(self, document: str) -> int:
        try:
            entries = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SigImportError(f"malformed ABI JSON: {exc.msg}", exc.lineno, exc.colno) from None
        if isinstance(entries, dict) and "abi" in entries:
            entries = entries["abi"]
        if not isinstance(entries, list):
            raise SigImportError("ABI document must be a JSON array")
        added = 0
        for i, entry in enumerate(entries):
            if not isinstance(entry, dict):
                raise SigImportError(f"ABI entry {i} is not an object")
            if entry.get("type", "function") != "function":
                continue
            try:
                sig = entry["name"] + "(" + ",".join(abi_type(p) for p in entry.get("inputs", [])) + ")"
            except (KeyError, TypeError) as exc:
                raise SigImportError(f"ABI entry {i} is missing {exc}") from None
            except CanonicalizationError as exc:
                raise SigImportError(f"ABI entry {i}: {exc}") from None
            added += self.add(sig, "abi")
        return added

    def import_signature_lines(self, text: str, source: str = "lines") -> int:
        added = 0
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                added += self.add(line, source)
            except CanonicalizationError as exc:
                self.warnings.append(f"line {n}: {exc}")
        return added

    def import_phrases(self, text: str, source: str = "devdoc") -> int:
        """Import ``<text_sig> TAB <phrase>`` lines (the summarizer's output)."""
        added = 0
        for n, raw in enumerate(text.splitlines(), 1):
            if not raw.strip():
                continue
            sig, sep, phrase = raw.partition("\t")
            if not sep or not phrase.strip():
                self.warnings.append(f"line {n}: expected <signature>\\t<phrase>")
                continue
            try:
                added += self.add(sig.strip(), source, _unescape(phrase.strip()))
            except CanonicalizationError as exc:
                self.warnings.append(f"line {n}: {exc}")
        return added

    # ---- reads
    def lookup(self, selector: int | bytes | str) -> list[SignatureRecord]:
        recs = self._by_selector.get(parse_selector(selector), [])
        return sorted(recs, key=lambda r: r.text_sig)

    def lookup_phrase(self, text_sig: str) -> Phrase | None:
        rec = self._by_sig.get(text_sig)
        if rec is None or not rec.phrases:
            return None
        return min(rec.phrases, key=lambda p: (PHRASE_PRIORITY.get(p.source, 9), -p.weight))

    # ---- persistence
    def dumps(self) -> str:
        lines = []
        for rec in self.records():
            with_phrase = {p.source for p in rec.phrases}
            for src in sorted(rec.sources - with_phrase):
                lines.append(f"{rec.selector:08x}\t{rec.text_sig}\t{src}")
            for p in rec.phrases:
                lines.append(f"{rec.selector:08x}\t{rec.text_sig}\t{p.source}\t{_escape(p.text)}")
        return "".join(line + "\n" for line in lines)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str) -> "SigDatabase":
        db = cls()
        db.merge_text(text)
        return db

    def merge_text(self, text: str) -> None:
        first_new = len(self.rejected)
        for n, raw in enumerate(text.splitlines(), 1):
            if not raw.strip() or raw.startswith("#"):
                continue
            cols = raw.rstrip("\n").split("\t")
            if len(cols) < 3:
                self.rejected.append(f"line {n}: expected at least 3 columns")
                continue
            hexsel, sig, source = cols[0], cols[1], cols[2]
            phrase = _unescape(cols[3]) if len(cols) > 3 and cols[3] else None
            try:
                derived = selector_int(sig)
                declared = parse_selector(hexsel)
            except (CanonicalizationError, ValueError) as exc:
                self.rejected.append(f"line {n}: {exc}")
                continue
            if derived != declared:
                self.rejected.append(f"line {n}: selector 0x{declared:08x} does not match {sig} (0x{derived:08x})")
                continue
            if source not in SOURCES:
                self.rejected.append(f"line {n}: unknown source {source!r}")
                continue
            self.add(sig, source, phrase)
        for msg in self.rejected[first_new:]:
            log.warning("sigdb: rejected %s", msg)

    @classmethod
    def load(cls, paths: str | Path | Iterable[str | Path]) -> "SigDatabase":
        if isinstance(paths, (str, Path)):
            paths = [paths]
        db = cls()
        for p in paths:
            db.merge_text(Path(p).read_text(encoding="utf-8"))
        return db


def builtin_database() -> SigDatabase:
    """Database seeded with the shipped ERC interface phrases."""
    here = Path(__file__).parent / "data" / "ercdoc.tsv"
    return SigDatabase.load(here)
