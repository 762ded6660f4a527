"""Command-line front end.

Every subcommand is a thin client of the HTTP service: by default the
FastAPI app runs in-process (no socket, no separate server), while
``--server http://host:port`` points the same commands at a remote
instance. File paths always refer to the filesystem the service sees.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import asyncio
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x != ""]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x != ""]


def load_config(path: str) -> dict[str, str]:
    """key = value lines; blank lines and # comments ignored."""
    config: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}: line {line_no}: expected key = value")
        key, _, value = line.partition("=")
        config[key.strip().replace("-", "_")] = value.strip()
    return config


class Options:
    """Flag > config file > built-in default."""

    def __init__(self, args: argparse.Namespace, config: dict[str, str]):
        self.args = args
        self.config = config

    def get(self, name: str, default=None, cast=None):
        value = getattr(self.args, name, None)
        if value is None:
            value = self.config.get(name)
            if value is not None and cast is not None:
                value = cast(value)
        if value is None:
            value = default
        return value


def request(server: str | None, path: str, payload: dict) -> tuple[int, dict]:
    """POST to a remote server, or to the in-process app when server is None."""

    async def go() -> tuple[int, dict]:
        if server is None:
            from .service import create_app

            transport = httpx.ASGITransport(app=create_app())
            client = httpx.AsyncClient(
                transport=transport, base_url="http://spix.internal", timeout=None
            )
        else:
            client = httpx.AsyncClient(base_url=server, timeout=None)
        async with client:
            response = await client.post(path, json=payload)
            return response.status_code, response.json()

    return asyncio.run(go())


def _fail(status: int, body: dict) -> int:
    detail = body.get("detail", body)
    kind = body.get("kind", "")
    label = f" [{kind}]" if kind else ""
    print(f"error{label}: {detail}", file=sys.stderr)
    if status == 422:
        return EXIT_USAGE
    if status == 400:
        return EXIT_DATA
    return EXIT_INTERNAL


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file (flags win)")
    common.add_argument("--server", help="remote service URL (default: in-process)")
    common.add_argument("--seed", type=int, help="random seed where applicable")
    common.add_argument("--workers", type=int, help="query worker pool size")

    parser = _Parser(prog="spix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="build an index from a corpus file")
    p.add_argument("corpus", help="corpus path (vector or text records)")
    p.add_argument("output", help="index file to write")
    p.add_argument("--mode", choices=["vector", "text"])
    p.add_argument("--document-k", type=int, dest="document_k",
                   help="static top-k document pruning (0 = none)")
    p.add_argument("--k1", type=float)
    p.add_argument("--b", type=float)

    p = sub.add_parser("search", parents=[common], help="run a query file against an index")
    p.add_argument("index", help="index file")
    p.add_argument("queries", help="query file")
    p.add_argument("--mode", choices=["vector", "text"])
    p.add_argument("--top-n", type=int, dest="top_n")
    p.add_argument("--query-k", type=int, dest="query_k")
    p.add_argument("--threshold", type=float)
    p.add_argument("--output", help="write results here instead of stdout")
    p.add_argument("--k1", type=float)
    p.add_argument("--b", type=float)

    p = sub.add_parser("eval", parents=[common], help="score a results file against judgments")
    p.add_argument("results", help="search results file")
    p.add_argument("judgments", help="judgments file")
    p.add_argument("--embeddings", help="embeddings file (enables SSS@k)")
    p.add_argument("--k", type=int)
    p.add_argument("--sss-aggregate", choices=["max", "mean"], dest="sss_aggregate")
    p.add_argument("--csv", help="also write a machine-readable CSV report")

    p = sub.add_parser("sweep", parents=[common], help="pruning/threshold grid experiment")
    p.add_argument("corpus")
    p.add_argument("queries")
    p.add_argument("judgments")
    p.add_argument("output_csv")
    p.add_argument("--embeddings")
    p.add_argument("--mode", choices=["vector", "text"])
    p.add_argument("--document-ks", type=_int_list, dest="document_ks",
                   help="comma-separated document_k grid, 0 = none")
    p.add_argument("--query-ks", type=_int_list, dest="query_ks")
    p.add_argument("--thresholds", type=_float_list)
    p.add_argument("--top-n", type=int, dest="top_n")
    p.add_argument("--repetitions", type=int)
    p.add_argument("--k1", type=float)
    p.add_argument("--b", type=float)

    p = sub.add_parser("flops", parents=[common], help="activation-probability FLOPS estimate")
    p.add_argument("index")
    p.add_argument("queries")
    p.add_argument("--mode", choices=["vector", "text"])

    p = sub.add_parser("losses-selftest", parents=[common],
                       help="check loss values and gradients against finite differences")
    p.add_argument("--sizes", help="comma-separated NxV sizes, e.g. 2x5,4x16")
    p.add_argument("--instances", type=int)

    p = sub.add_parser("gen-synthetic", parents=[common],
                       help="generate a seeded synthetic corpus/queries/judgments/embeddings")
    p.add_argument("out_dir")
    p.add_argument("--doc-count", type=int, dest="doc_count")
    p.add_argument("--vocab-size", type=int, dest="vocab_size")
    p.add_argument("--query-count", type=int, dest="query_count")
    p.add_argument("--cluster-size", type=int, dest="cluster_size")
    p.add_argument("--embedding-dim", type=int, dest="embedding_dim")

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _parse_sizes(text: str) -> list[list[int]]:
    sizes = []
    for piece in text.split(","):
        n, _, v = piece.partition("x")
        sizes.append([int(n), int(v)])
    return sizes


def _print_kv(body: dict, keys: list[str]) -> None:
    for key in keys:
        print(f"{key}: {body[key]}")


def _run_command(args: argparse.Namespace) -> int:
    config = load_config(args.config) if getattr(args, "config", None) else {}
    opt = Options(args, config)
    server = opt.get("server")

    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return EXIT_OK

    if args.command == "build":
        payload = {
            "corpus_path": args.corpus,
            "output_path": args.output,
            "mode": opt.get("mode", "vector"),
            "document_k": opt.get("document_k", 0, int),
            "k1": opt.get("k1", 1.2, float),
            "b": opt.get("b", 0.75, float),
        }
        status, body = request(server, "/build", payload)
        if status != 200:
            return _fail(status, body)
        _print_kv(body, ["output_path", "doc_count", "vocab_size", "total_postings"])
        return EXIT_OK

    if args.command == "search":
        payload = {
            "index_path": args.index,
            "queries_path": args.queries,
            "mode": opt.get("mode", "vector"),
            "top_n": opt.get("top_n", 10, int),
            "query_k": opt.get("query_k", 0, int),
            "threshold": opt.get("threshold", 0.0, float),
            "workers": opt.get("workers", 1, int),
            "output_path": opt.get("output"),
            "k1": opt.get("k1", 1.2, float),
            "b": opt.get("b", 0.75, float),
        }
        status, body = request(server, "/search", payload)
        if status != 200:
            return _fail(status, body)
        for warning in body["warnings"]:
            print(f"warning: query {warning['query_id']}: {warning['reason']}",
                  file=sys.stderr)
        if body["results"] is not None:
            for qr in body["results"]:
                for hit in qr["hits"]:
                    print(f"{qr['query_id']}\t{hit['rank']}\t{hit['external_id']}"
                          f"\t{hit['score']:.9g}\t{hit['matched_terms']}")
        if body["latency"] is not None:
            lat = body["latency"]
            print(
                "latency s/query: mean {mean:.6f} p50 {p50:.6f} p95 {p95:.6f} max {max:.6f}".format(**lat),
                file=sys.stderr,
            )
        return EXIT_OK

    if args.command == "eval":
        payload = {
            "results_path": args.results,
            "judgments_path": args.judgments,
            "embeddings_path": opt.get("embeddings"),
            "k": opt.get("k", 10, int),
            "sss_aggregate": opt.get("sss_aggregate", "max"),
            "csv_path": opt.get("csv"),
        }
        status, body = request(server, "/eval", payload)
        if status != 200:
            return _fail(status, body)
        k = body["k"]
        print(f"judged_queries: {body['judged_queries']}")
        print(f"mrr@{k}: {body['mrr']}")
        if body["sss"] is not None:
            print(f"sss@{k}: {body['sss']}")
        if body["csv_path"]:
            print(f"csv: {body['csv_path']}")
        return EXIT_OK

    if args.command == "sweep":
        payload = {
            "corpus_path": args.corpus,
            "queries_path": args.queries,
            "judgments_path": args.judgments,
            "output_csv": args.output_csv,
            "embeddings_path": opt.get("embeddings"),
            "mode": opt.get("mode", "vector"),
            "document_ks": opt.get("document_ks", [0], _int_list),
            "query_ks": opt.get("query_ks", [0], _int_list),
            "thresholds": opt.get("thresholds", [0.0, 0.2, 0.4, 0.6, 0.8], _float_list),
            "top_n": opt.get("top_n", 10, int),
            "repetitions": opt.get("repetitions", 1, int),
            "workers": opt.get("workers", 1, int),
            "k1": opt.get("k1", 1.2, float),
            "b": opt.get("b", 0.75, float),
        }
        status, body = request(server, "/sweep", payload)
        if status != 200:
            return _fail(status, body)
        print(f"rows: {len(body['rows'])}")
        print(f"csv: {body['output_csv']}")
        return EXIT_OK

    if args.command == "flops":
        payload = {
            "index_path": args.index,
            "queries_path": args.queries,
            "mode": opt.get("mode", "vector"),
        }
        status, body = request(server, "/flops", payload)
        if status != 200:
            return _fail(status, body)
        print(f"query_count: {body['query_count']}")
        print(f"flops: {body['flops']}")
        return EXIT_OK

    if args.command == "losses-selftest":
        payload = {
            "seed": opt.get("seed", 0, int),
            "instances": opt.get("instances", 50, int),
        }
        sizes = opt.get("sizes")
        if sizes is not None:
            payload["sizes"] = _parse_sizes(sizes)
        status, body = request(server, "/losses/selftest", payload)
        if status != 200:
            return _fail(status, body)
        for check in body["checks"]:
            verdict = "PASS" if check["passed"] else "FAIL"
            print(f"{verdict}  {check['name']}: max_error={check['max_error']:.3e} "
                  f"tolerance={check['tolerance']:.0e}")
        if not body["passed"]:
            print("losses selftest FAILED", file=sys.stderr)
            return EXIT_INTERNAL
        return EXIT_OK

    if args.command == "gen-synthetic":
        payload = {
            "out_dir": args.out_dir,
            "seed": opt.get("seed", 0, int),
            "doc_count": opt.get("doc_count", 1000, int),
            "vocab_size": opt.get("vocab_size", 2000, int),
            "query_count": opt.get("query_count", 50, int),
            "cluster_size": opt.get("cluster_size", 14, int),
            "embedding_dim": opt.get("embedding_dim", 16, int),
        }
        status, body = request(server, "/synthetic", payload)
        if status != 200:
            return _fail(status, body)
        _print_kv(body, ["corpus", "queries", "judgments", "embeddings",
                         "doc_count", "query_count"])
        return EXIT_OK

    raise AssertionError(f"unhandled command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _run_command(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except httpx.HTTPError as exc:
        print(f"error: request failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # invariant violations, bugs
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
