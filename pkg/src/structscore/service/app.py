"""FastAPI service exposing corpus evaluation over HTTP.

The CLI is a thin client of these endpoints; running the service
standalone lets several clients share one evaluator deployment.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..corpus import RunConfig, explain, list_metrics, run_eval
from ..errors import SolverResourceError, StructScoreError
from ..schema import parse_schema
from .models import (
    ErrorInfo,
    ErrorResponse,
    EvalRequest,
    EvalResponse,
    ExplainRequest,
    ExplainResponse,
    MetricInfo,
    ValidateSchemaRequest,
    ValidateSchemaResponse,
)


def _run_config(req) -> RunConfig:
    return RunConfig(
        metrics=tuple(req.metrics or ()),
        schema=req.schema_doc,
        dataset_config=req.config,
        report=tuple(req.report) if req.report else None,
        aggregation=req.aggregation,
        solver=req.solver,
        seed=req.seed,
        node_limit=req.node_limit,
        jobs=req.jobs,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="structscore", version="0.1.0")

    @app.exception_handler(StructScoreError)
    async def on_error(request: Request, exc: StructScoreError):
        status = 422 if isinstance(exc, SolverResourceError) else 400
        body = ErrorResponse(error=ErrorInfo(kind=exc.kind, message=str(exc)))
        return JSONResponse(status_code=status, content=body.model_dump())

    @app.get("/metrics", response_model=list[MetricInfo], response_model_exclude_none=True)
    def metrics(verbose: bool = False):
        return list_metrics(verbose=verbose)

    @app.post("/schema/validate", response_model=ValidateSchemaResponse)
    def validate_schema(req: ValidateSchemaRequest):
        schema = parse_schema(req.schema_doc)
        return ValidateSchemaResponse(
            ok=True,
            types=sorted(schema.types),
            root=schema.metric.root if schema.metric else None,
        )

    @app.post("/eval", response_model=EvalResponse)
    def eval_corpus(req: EvalRequest):
        report = run_eval(_run_config(req), req.pred_jsonl, req.gold_jsonl)
        return EvalResponse(report=report)

    @app.post("/explain", response_model=ExplainResponse)
    def explain_doc(req: ExplainRequest):
        result = explain(_run_config(req), req.pred_jsonl, req.gold_jsonl, req.doc_id)
        return ExplainResponse(explanation=result)

    return app


app = create_app()
