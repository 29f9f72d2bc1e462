import io
import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from bytedoc import cli, fixtures
from bytedoc.nlg import DescriptionDoc

CODE_ADDR = "0x" + "11" * 20
EOA_ADDR = "0x" + "22" * 20
ERROR_ADDR = "0x" + "33" * 20


class _Node(BaseHTTPRequestHandler):
    code = fixtures.figure_dispatcher().program.hex

    def do_POST(self):
        req = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        assert req["method"] == "eth_getCode" and req["params"][1] == "latest"
        addr = req["params"][0]
        if addr == ERROR_ADDR:
            body = {"jsonrpc": "2.0", "id": req["id"], "error": {"code": -32000, "message": "boom"}}
        else:
            body = {"jsonrpc": "2.0", "id": req["id"], "result": self.code if addr == CODE_ADDR else "0x"}
        data = json.dumps(body).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture(scope="module")
def rpc_url():
    server = HTTPServer(("127.0.0.1", 0), _Node)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


@pytest.fixture
def hexfile(tmp_path):
    def write(program, name="code.hex"):
        p = tmp_path / name
        p.write_text(program.hex + "\n")
        return str(p)

    return write


def run(*argv, stdin=None, monkeypatch=None):
    out = io.StringIO()
    if stdin is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    return cli.main(list(argv), out=out), out.getvalue()


def test_fetch_code(rpc_url):
    assert cli.fetch_code(rpc_url, CODE_ADDR) == fixtures.figure_dispatcher().code


def test_fetch_empty_code_and_errors(rpc_url):
    with pytest.raises(cli.EmptyCode):
        cli.fetch_code(rpc_url, EOA_ADDR)
    with pytest.raises(cli.RpcError):
        cli.fetch_code(rpc_url, ERROR_ADDR)
    with pytest.raises(cli.RpcError):
        cli.fetch_code("http://127.0.0.1:9", CODE_ADDR, timeout=1)
    with pytest.raises(cli.UsageError):
        cli.fetch_code(rpc_url, "0x1234")


def test_describe_file(hexfile):
    code, out = run("describe", "--file", hexfile(fixtures.figure_dispatcher().program))
    assert code == 0
    assert out.startswith("== 0x06fdde03 name() ==")
    assert "Total supply of tokens." in out


def test_describe_by_address(rpc_url):
    code, out = run("describe", "--rpc-url", rpc_url, "--address", CODE_ADDR, "--format", "jsonl")
    assert code == 0
    docs = [DescriptionDoc.from_json(line) for line in out.splitlines()]
    assert [d.selector_hex for d in docs] == ["0x06fdde03", "0x18160ddd"]


def test_rpc_url_from_environment(rpc_url, monkeypatch):
    monkeypatch.setenv(cli.ENV_RPC_URL, rpc_url)
    assert run("selectors", "--address", CODE_ADDR)[0] == 0
    # the flag wins over the environment
    monkeypatch.setenv(cli.ENV_RPC_URL, "http://127.0.0.1:9")
    assert run("selectors", "--address", CODE_ADDR, "--rpc-url", rpc_url)[0] == 0


def test_eoa_is_analysis_error(rpc_url):
    assert run("describe", "--rpc-url", rpc_url, "--address", EOA_ADDR)[0] == 1


def test_describe_stdin(monkeypatch):
    code, out = run("describe", "--stdin", stdin=fixtures.nf_fixture().hex, monkeypatch=monkeypatch)
    assert (code, out) == (0, "ALERT: This is an insecure NF contract!\n")


def test_selectors_on_figure(hexfile):
    code, out = run("selectors", "--file", hexfile(fixtures.figure_dispatcher().program))
    fx = fixtures.figure_dispatcher()
    assert code == 0
    assert out.splitlines() == [
        f"0x06fdde03 0x{fx.expected[0][1]:04x} type1",
        f"0x18160ddd 0x{fx.expected[1][1]:04x} type2",
    ]


@pytest.mark.parametrize(
    "argv",
    [
        ["describe"],
        ["describe", "--file", "a", "--stdin"],
        ["describe", "--address", "0xabc", "--rpc-url", "http://x"],
        ["describe", "--address", CODE_ADDR],
        ["describe", "--file", "/nonexistent.hex"],
        ["describe", "--file", "x", "--max-paths", "0"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors(argv, monkeypatch):
    monkeypatch.delenv(cli.ENV_RPC_URL, raising=False)
    assert run(*argv)[0] == 2


def test_bad_hex_is_usage_error(tmp_path):
    p = tmp_path / "odd.hex"
    p.write_text("0x600")
    assert run("describe", "--file", str(p))[0] == 2


def test_emit_cfg(hexfile, tmp_path):
    dot = tmp_path / "cfg.dot"
    assert run("describe", "--file", hexfile(fixtures.composite_fixture().program), "--emit-cfg", str(dot))[0] == 0
    assert dot.read_text().startswith("digraph")


def test_sigdb_commands(tmp_path, monkeypatch):
    db = tmp_path / "db.tsv"
    abi = tmp_path / "abi.json"
    abi.write_text(json.dumps([{"type": "function", "name": "deposit", "inputs": []}]))
    lines = tmp_path / "sigs.txt"
    lines.write_text("withdraw(uint256 amount)\nnot a sig\n")
    phrases = tmp_path / "phrases.tsv"
    phrases.write_text("deposit()\tDeposits ETH.\n")
    assert run("sigdb", "import-abi", str(abi), "--db", str(db))[0] == 0
    assert run("sigdb", "import-lines", str(lines), "--db", str(db))[0] == 0
    assert run("sigdb", "import-phrases", str(phrases), "--db", str(db))[0] == 0
    code, out = run("sigdb", "lookup", "0xd0e30db0", "--db", str(db))
    assert (code, out) == (0, "deposit()\tDeposits ETH.\n")
    erc = tmp_path / "erc.tsv"
    erc.write_text("deposit()\tPuts ETH in.\n")
    assert run("sigdb", "import-phrases", str(erc), "--db", str(db), "--source", "ercdoc")[0] == 0
    assert run("sigdb", "lookup", "0xd0e30db0", "--db", str(db))[1] == "deposit()\tPuts ETH in.\n"
    monkeypatch.setenv(cli.ENV_SIGDB, str(db))
    assert run("sigdb", "lookup", "2e1a7d4d")[1] == "withdraw(uint256)\n"
    assert run("sigdb", "lookup", "nothex")[0] == 2


def test_sigdb_bad_abi_is_analysis_error(tmp_path):
    bad = tmp_path / "abi.json"
    bad.write_text("[{")
    assert run("sigdb", "import-abi", str(bad), "--db", str(tmp_path / "db.tsv"))[0] == 1


def test_summarize_output_feeds_sigdb(tmp_path):
    corpus = tmp_path / "corpus.tsv"
    corpus.write_text("".join(f"totalSupply()\t{s} More text.\n" for s in fixtures.TOTAL_SUPPLY_SENTENCES))
    code, out = run("summarize", "--corpus", str(corpus))
    assert (code, out) == (0, "totalSupply()\tTotal supply of tokens.\n")
    phrases = tmp_path / "phrases.tsv"
    phrases.write_text(out)
    db = tmp_path / "db.tsv"
    assert run("sigdb", "import-phrases", str(phrases), "--db", str(db))[0] == 0
    assert "devdoc\tTotal supply of tokens." in db.read_text()


def test_phrase_command():
    assert run("phrase", "isPresaleReady()") == (0, "Checks whether the presale is ready\n")
    assert run("phrase", "MAX_INVESTMENTS_BEFORE_CHANGE()")[0] == 1


def test_help_lists_subcommands(capsys):
    assert cli.main(["--help"]) == 0
    text = capsys.readouterr().out
    for name in ("describe", "selectors", "sigdb", "summarize", "phrase"):
        assert name in text
