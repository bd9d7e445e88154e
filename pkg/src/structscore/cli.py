"""Batch evaluation CLI: a thin client of the evaluation service.

Without ``--server`` the service runs in-process; with it, requests go
to a remote deployment. Either way the CLI only moves JSON around.
Exit codes: 0 success, 1 data/schema/config errors, 2 solver resource
errors.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

EXIT_CODES = {"resource": 2}


def _client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=300.0)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service.app import app

    return TestClient(app, raise_server_exceptions=False)


def _fail(payload: dict, code: int = 1):
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    sys.exit(code)


def _request(server: str | None, method: str, url: str, **kwargs) -> dict:
    with _client(server) as client:
        response = client.request(method, url, **kwargs)
    try:
        body = response.json()
    except ValueError:
        _fail({"error": {"kind": "transport", "message": response.text[:500]}})
    if response.status_code >= 400:
        error = body.get("error") or {"kind": "error", "message": str(body)}
        _fail({"error": error}, EXIT_CODES.get(error.get("kind"), 1))
    return body


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail({"error": {"kind": "data", "message": f"cannot read {path}: {exc}"}})
        raise AssertionError  # unreachable


def _load_json(path: str, what: str) -> dict:
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        _fail({"error": {"kind": "schema", "message": f"{what} {path} is not valid JSON: {exc}"}})
        raise AssertionError  # unreachable


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _render_report(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    lines = ["metric\tsigma_pr\tsigma_pp\tsigma_rr\tP\tR\tF\tJ"]
    for name, values in sorted(report.get("metrics", {}).items()):
        if "score" in values:  # two-factor product score
            lines.append(f"{name}\tscore={values['score']}")
            continue
        row = [name] + [
            "" if values.get(k) is None else repr(values.get(k))
            for k in ("sigma_pr", "sigma_pp", "sigma_rr", "P", "R", "F", "J")
        ]
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def _common_payload(schema, metric, config, aggregate, solver, seed, node_limit, jobs, report):
    payload: dict = {
        "solver": solver,
        "seed": seed,
        "node_limit": node_limit,
        "jobs": jobs,
    }
    if schema:
        payload["schema"] = _load_json(schema, "schema")
    if metric:
        payload["metrics"] = list(metric)
    if config:
        payload["config"] = _load_json(config, "config")
    if aggregate:
        payload["aggregation"] = aggregate
    if report:
        payload["report"] = [r.strip() for r in report.split(",") if r.strip()]
    return payload


_shared_options = [
    click.option("--schema", type=str, default=None, help="Schema JSON file."),
    click.option("--metric", "metrics", multiple=True, help="Builtin metric name (repeatable)."),
    click.option("--pred", required=True, type=str, help="Predictions JSONL file."),
    click.option("--gold", required=True, type=str, help="Reference JSONL file."),
    click.option("--config", type=str, default=None, help="Dataset config JSON file."),
    click.option("--aggregate", type=click.Choice(["micro", "macro"]), default=None),
    click.option("--solver", type=click.Choice(["exact", "hillclimb"]), default="exact"),
    click.option("--seed", type=int, default=0),
    click.option("--node-limit", type=int, default=10**6),
    click.option("--jobs", type=int, default=1),
    click.option("--report", type=str, default=None, help="Comma-separated subset of P,R,F,J."),
    click.option("--server", type=str, default=None, help="Remote service URL (default: in-process)."),
]


def _with_shared(fn):
    for option in reversed(_shared_options):
        fn = option(fn)
    return fn


@click.group()
def main():
    """Composable evaluation for structured prediction outputs."""


@main.command("eval")
@_with_shared
@click.option("--output", type=str, default=None, help="Write the report here instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["json", "tsv"]), default="json")
def eval_cmd(schema, metrics, pred, gold, config, aggregate, solver, seed,
             node_limit, jobs, report, server, output, fmt):
    """Evaluate a prediction corpus against a reference corpus."""
    payload = _common_payload(schema, metrics, config, aggregate, solver, seed,
                              node_limit, jobs, report)
    payload["pred_jsonl"] = _read(pred)
    payload["gold_jsonl"] = _read(gold)
    body = _request(server, "POST", "/eval", json=payload)
    _emit(_render_report(body["report"], fmt), output)


@main.command("explain")
@_with_shared
@click.option("--doc-id", required=True, type=str)
@click.option("--output", type=str, default=None)
def explain_cmd(schema, metrics, pred, gold, config, aggregate, solver, seed,
                node_limit, jobs, report, server, doc_id, output):
    """Dump the witness alignments for one document."""
    payload = _common_payload(schema, metrics, config, aggregate, solver, seed,
                              node_limit, jobs, report)
    payload["pred_jsonl"] = _read(pred)
    payload["gold_jsonl"] = _read(gold)
    payload["doc_id"] = doc_id
    body = _request(server, "POST", "/explain", json=payload)
    _emit(json.dumps(body["explanation"], indent=2, sort_keys=True) + "\n", output)


@main.command("validate-schema")
@click.option("--schema", required=True, type=str)
@click.option("--server", type=str, default=None)
def validate_schema_cmd(schema, server):
    """Check a schema file and list its types."""
    body = _request(server, "POST", "/schema/validate",
                    json={"schema": _load_json(schema, "schema")})
    sys.stdout.write(json.dumps(body, indent=2, sort_keys=True) + "\n")


@main.command("list-metrics")
@click.option("--verbose", is_flag=True, default=False)
@click.option("--server", type=str, default=None)
def list_metrics_cmd(verbose, server):
    """List the builtin metrics (payload shapes with --verbose)."""
    body = _request(server, "GET", "/metrics", params={"verbose": verbose})
    sys.stdout.write(json.dumps(body, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
