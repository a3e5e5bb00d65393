"""Request/response models for the HTTP API.

Responses carry both the rendered notation and a structured form so
clients never re-derive KB logic from text.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class CommandRequest(BaseModel):
    text: str


class ConflictOut(BaseModel):
    object: str
    kind: str
    via_measure: bool = False
    advisory: bool = False
    rendered: str = ""
    corrective_template: str | None = None


class CloneOut(BaseModel):
    new_term: str
    for_user: str
    dropped_definition: str | None = None


class ReattributionOut(BaseModel):
    old_statement: str
    new_statement: str
    for_user: str


class CloneReportOut(BaseModel):
    original_term: str | None = None
    clones: list[CloneOut] = Field(default_factory=list)
    rewritten_statements: list[str] = Field(default_factory=list)
    reattributed: list[ReattributionOut] = Field(default_factory=list)


class OutcomeOut(BaseModel):
    status: str
    reason: str | None = None
    conflicts: list[ConflictOut] = Field(default_factory=list)
    clone_report: CloneReportOut | None = None
    created: list[str] = Field(default_factory=list)
    removed: list[str] = Field(default_factory=list)
    warnings: list[str] = Field(default_factory=list)


class TreeNodeOut(BaseModel):
    label: str
    link_kind: str | None = None
    creator: str | None = None
    display: str = "show"
    children: list["TreeNodeOut"] = Field(default_factory=list)


class CommandResponseOut(BaseModel):
    outcome: OutcomeOut | None = None
    tree: TreeNodeOut | None = None
    tree_text: str | None = None
    results: list[str] = Field(default_factory=list)
    sequence: int | None = None


class DraftResponse(BaseModel):
    would_accept: bool
    status: str
    reason: str | None = None
    conflicts: list[ConflictOut] = Field(default_factory=list)
    warnings: list[str] = Field(default_factory=list)


class StatementOut(BaseModel):
    id: str
    kind: str
    creator: str
    believer: str | None = None
    interpreted_source: str | None = None
    created: str = ""
    rendered: str = ""


class ObjectOut(BaseModel):
    id: str
    object_kind: str  # term | statement | source | rating
    rendered: str
    structured: dict = Field(default_factory=dict)


class RatingIn(BaseModel):
    object: str
    criterion: str = "acceptance"
    value: float


class RatingOut(BaseModel):
    id: str
    rater: str
    object: str
    criterion: str
    value: float
    date: str


class UserOut(BaseModel):
    name: str
    kind: str


class ScoreOut(BaseModel):
    object: str
    score: float
    creator: str | None = None
    creator_score: float | None = None


class FilterApplyRequest(BaseModel):
    filter: str
    objects: list[str]


class FilterResultOut(BaseModel):
    object: str
    display: str


TreeNodeOut.model_rebuild()
