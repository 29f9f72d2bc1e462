"""Command-line front end.

Exit status: 0 on success (insecure-contract alerts included), 1 when the
analysis or a fetch fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__, swum
from .cfg import to_dot
from .dispatcher import recover_dispatcher
from .cfg import cfg_from_code
from .evm import EmptyBytecode, decode_hex
from .nlg import DescribeConfig, analyze_contract
from .sigdb import CanonicalizationError, SigDatabase, SigImportError, builtin_database
from .summarize import EmptyCorpus, SummarizeConfig, preprocess, summarize
from .symexec import ExecLimits

ENV_RPC_URL = "BYTEDOC_RPC_URL"
ENV_SIGDB = "BYTEDOC_SIGDB"

log = logging.getLogger("bytedoc")

_ADDRESS = re.compile(r"0x[0-9a-fA-F]{40}\Z")


class UsageError(Exception):
    pass


class RpcError(Exception):
    pass


class EmptyCode(Exception):
    pass


@dataclass
class RunConfig:
    source: str  # file | stdin | rpc
    path: str | None = None
    rpc_url: str | None = None
    address: str | None = None
    sigdb_paths: list[str] = field(default_factory=list)
    limits: ExecLimits = ExecLimits()
    output: str = "text"
    emit_cfg: str | None = None
    jobs: int = 1
    rpc_timeout: float = 10.0


def fetch_code(rpc_url: str, address: str, timeout: float = 10.0) -> bytes:
    """Runtime bytecode of ``address`` at the latest block via ``eth_getCode``."""
    if not _ADDRESS.match(address):
        raise UsageError(f"address must be 0x followed by 40 hex digits, got {address!r}")
    payload = json.dumps(
        {"jsonrpc": "2.0", "id": 1, "method": "eth_getCode", "params": [address, "latest"]}
    ).encode()
    req = urllib.request.Request(rpc_url, payload, {"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            reply = json.loads(resp.read().decode())
    except (urllib.error.URLError, OSError, ValueError) as exc:
        raise RpcError(f"eth_getCode request to {rpc_url} failed: {exc}") from None
    if not isinstance(reply, dict):
        raise RpcError("malformed JSON-RPC reply")
    if reply.get("error"):
        raise RpcError(f"node returned an error: {reply['error']}")
    result = reply.get("result")
    if not isinstance(result, str):
        raise RpcError("JSON-RPC reply has no result")
    if result in ("0x", ""):
        raise EmptyCode(f"{address} has no code (an externally owned or self-destructed account)")
    try:
        return decode_hex(result)
    except ValueError as exc:
        raise RpcError(f"node returned malformed hex: {exc}") from None


# ---------------------------------------------------------------------------
# argument handling


def _add_input(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("input (exactly one of --file, --stdin, --address)")
    g.add_argument("--file", help="file holding hex-encoded runtime bytecode")
    g.add_argument("--stdin", action="store_true", help="read hex bytecode from standard input")
    g.add_argument("--address", help="contract address to fetch with eth_getCode")
    g.add_argument("--rpc-url", help=f"JSON-RPC endpoint (default: ${ENV_RPC_URL})")
    g.add_argument("--rpc-timeout", type=float, default=10.0, help="seconds to wait for the node")


def _add_analysis(p: argparse.ArgumentParser) -> None:
    d = ExecLimits()
    p.add_argument("--sigdb", action="append", default=None, help=f"signature database file (repeatable; default: ${ENV_SIGDB})")
    p.add_argument("--max-paths", type=int, default=d.max_paths, help="paths explored per function")
    p.add_argument("--max-steps", type=int, default=d.max_steps, help="instructions per path")
    p.add_argument("--timeout-secs", type=float, default=d.timeout, help="time budget per function")
    p.add_argument("--format", choices=["text", "jsonl"], default="text", help="output format")
    p.add_argument("--emit-cfg", metavar="PATH", help="write the augmented CFG as Graphviz dot")
    p.add_argument("--jobs", type=int, default=1, help="functions analyzed in parallel")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bytedoc", description="Describe contract interfaces from EVM runtime bytecode.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("describe", help="describe every interface of a contract")
    _add_input(p)
    _add_analysis(p)

    p = sub.add_parser("selectors", help="list dispatcher bindings: selector, entry pc, pattern")
    _add_input(p)

    p = sub.add_parser("sigdb", help="maintain a signature database file")
    dbsub = p.add_subparsers(dest="action", required=True)
    for name, helptext in (("import-abi", "import functions from an ABI JSON file"),
                           ("import-lines", "import one text signature per line"),
                           ("import-phrases", "import <signature> TAB <phrase> lines as devdoc phrases")):
        q = dbsub.add_parser(name, help=helptext)
        q.add_argument("input", help="file to import")
        q.add_argument("--db", help=f"database file to update (default: ${ENV_SIGDB})")
        if name == "import-phrases":
            q.add_argument("--source", choices=["devdoc", "ercdoc", "swum-cache"], default="devdoc")
    q = dbsub.add_parser("lookup", help="print text signatures for a selector")
    q.add_argument("selector", help="4-byte selector, e.g. 0x18160ddd")
    q.add_argument("--db", action="append", help="extra database file (repeatable)")

    p = sub.add_parser("summarize", help="pick one phrase per signature from annotation text")
    p.add_argument("--corpus", required=True, help="file of <text_sig> TAB <annotation> lines")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--num-hashes", type=int, default=SummarizeConfig().num_hashes)

    p = sub.add_parser("phrase", help="phrase for a function signature built from its name")
    p.add_argument("signature")
    return parser


def _env_paths(value: str | None) -> list[str]:
    return [p for p in (value or "").split(os.pathsep) if p]


def run_config(args: argparse.Namespace) -> RunConfig:
    chosen = [n for n, v in (("file", args.file), ("stdin", args.stdin), ("rpc", args.address)) if v]
    if len(chosen) != 1:
        raise UsageError("give exactly one input: --file, --stdin or --address")
    rpc_url = args.rpc_url or os.environ.get(ENV_RPC_URL)
    if chosen[0] == "rpc" and not rpc_url:
        raise UsageError(f"--address needs --rpc-url or ${ENV_RPC_URL}")
    if chosen[0] == "rpc" and not _ADDRESS.match(args.address):
        raise UsageError(f"address must be 0x followed by 40 hex digits, got {args.address!r}")
    cfg = RunConfig(chosen[0], args.file, rpc_url, args.address, rpc_timeout=args.rpc_timeout)
    if hasattr(args, "max_paths"):
        if args.max_paths < 1 or args.max_steps < 1 or args.timeout_secs <= 0 or args.jobs < 1:
            raise UsageError("limits and --jobs must be positive")
        cfg.sigdb_paths = args.sigdb if args.sigdb is not None else _env_paths(os.environ.get(ENV_SIGDB))
        cfg.limits = ExecLimits(args.max_paths, args.max_steps, args.timeout_secs)
        cfg.output = args.format
        cfg.emit_cfg = args.emit_cfg
        cfg.jobs = args.jobs
    return cfg


def read_code(cfg: RunConfig) -> bytes:
    if cfg.source == "rpc":
        return fetch_code(cfg.rpc_url, cfg.address, cfg.rpc_timeout)
    try:
        text = sys.stdin.read() if cfg.source == "stdin" else Path(cfg.path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {cfg.path}: {exc}") from None
    try:
        code = decode_hex(text)
    except ValueError as exc:
        raise UsageError(f"invalid hex input: {exc}") from None
    if not code:
        raise EmptyBytecode("input holds no bytecode")
    return code


def load_database(paths: Sequence[str]) -> SigDatabase:
    db = builtin_database()
    for p in paths:
        try:
            db.merge_text(Path(p).read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read signature database {p}: {exc}") from None
    return db


# ---------------------------------------------------------------------------
# commands


def cmd_describe(args, out) -> int:
    cfg = run_config(args)
    code = read_code(cfg)
    db = load_database(cfg.sigdb_paths)
    analysis = analyze_contract(code, db, DescribeConfig(limits=cfg.limits, jobs=cfg.jobs))
    if cfg.emit_cfg:
        Path(cfg.emit_cfg).write_text(to_dot(analysis.cfg))
    for i, doc in enumerate(analysis.docs):
        if cfg.output == "jsonl":
            print(doc.to_json(), file=out)
        else:
            if i:
                print(file=out)
            print(doc.render(), file=out)
    return 0


def cmd_selectors(args, out) -> int:
    code = read_code(run_config(args))
    cfg = cfg_from_code(code)
    for b in recover_dispatcher(cfg, code).bindings:
        print(f"{b.selector_hex} 0x{b.entry_pc:04x} {b.pattern}", file=out)
    return 0


def _db_path(arg: str | None) -> Path:
    path = arg or (_env_paths(os.environ.get(ENV_SIGDB)) or [None])[0]
    if not path:
        raise UsageError(f"give --db or set ${ENV_SIGDB}")
    return Path(path)


def cmd_sigdb(args, out) -> int:
    if args.action == "lookup":
        paths = args.db if args.db is not None else _env_paths(os.environ.get(ENV_SIGDB))
        db = load_database([p for p in paths if Path(p).exists()])
        try:
            records = db.lookup(args.selector)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        for r in records:
            phrase = db.lookup_phrase(r.text_sig)
            print(r.text_sig + (f"\t{phrase.text}" if phrase else ""), file=out)
        return 0

    path = _db_path(args.db)
    db = SigDatabase.load(path) if path.exists() else SigDatabase()
    try:
        text = Path(args.input).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc}") from None
    if args.action == "import-abi":
        added = db.import_abi(text)
    elif args.action == "import-lines":
        added = db.import_signature_lines(text)
    else:
        added = db.import_phrases(text, args.source)
    db.save(path)
    for w in db.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"added {added} signature(s); {len(db)} in {path}", file=out)
    return 0


def cmd_summarize(args, out) -> int:
    groups: dict[str, list[str]] = {}
    try:
        lines = Path(args.corpus).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read {args.corpus}: {exc}") from None
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        sig, sep, note = line.partition("\t")
        if not sep:
            print(f"warning: line {n}: expected <signature>\\t<annotation>", file=sys.stderr)
            continue
        groups.setdefault(sig.strip(), []).append(note)
    config = SummarizeConfig(num_hashes=args.num_hashes, seed=args.seed)
    for sig, notes in groups.items():
        try:
            result = summarize(preprocess(notes, sig), config)
        except EmptyCorpus:
            print(f"warning: no usable annotation for {sig}", file=sys.stderr)
            continue
        print(f"{sig}\t{result.sentence}", file=out)
    return 0


def cmd_phrase(args, out) -> int:
    try:
        print(swum.generate_phrase(args.signature), file=out)
    except swum.PhraseUnavailable as exc:
        print(f"phrase unavailable: {exc}", file=sys.stderr)
        return 1
    return 0


COMMANDS = {
    "describe": cmd_describe,
    "selectors": cmd_selectors,
    "sigdb": cmd_sigdb,
    "summarize": cmd_summarize,
    "phrase": cmd_phrase,
}


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RpcError, EmptyCode, EmptyBytecode, SigImportError, CanonicalizationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # analysis bug or unexpected input
        log.debug("analysis failed", exc_info=True)
        print(f"error: analysis failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
