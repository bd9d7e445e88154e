"""Request and response models for the evaluation service."""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, ConfigDict, Field


class EvalOptions(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    metrics: list[str] | None = None
    schema_doc: dict | None = Field(default=None, alias="schema")
    config: dict | None = None
    report: list[str] | None = None
    aggregation: str | None = None
    solver: str = "exact"
    seed: int = 0
    node_limit: int = 10**6
    jobs: int = 1


class EvalRequest(EvalOptions):
    pred_jsonl: str
    gold_jsonl: str


class ExplainRequest(EvalRequest):
    doc_id: str


class ValidateSchemaRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_doc: dict = Field(alias="schema")


class ValidateSchemaResponse(BaseModel):
    ok: bool
    types: list[str]
    root: str | None = None


class MetricInfo(BaseModel):
    name: str
    payload: str | None = None
    needs_config: bool | None = None
    preset_schema: bool | None = None


class ErrorInfo(BaseModel):
    kind: str
    message: str


class ErrorResponse(BaseModel):
    error: ErrorInfo


class EvalResponse(BaseModel):
    report: dict[str, Any]


class ExplainResponse(BaseModel):
    explanation: dict[str, Any]
