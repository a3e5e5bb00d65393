"""HTTP facade over the engine.

Every state change maps to exactly one journal entry; reads are served
from the live KB under the engine lock.  The acting user comes from the
X-User header (no authentication; identity is declarative).
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Header, Query
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..engine import CommandResponse, Engine
from ..evaluation import (
    IllTypedExpression,
    OutOfRangeError,
    apply_filter,
    default_scores,
)
from ..hierarchy import TreeNode, UnknownObjectError
from ..model import EditOutcome, RejectReason
from ..notation.lexer import ParseError
from ..notation.render import render_fe
from ..store import snapshot
from .schemas import (
    CloneOut,
    CloneReportOut,
    CommandRequest,
    CommandResponseOut,
    ConflictOut,
    DraftResponse,
    FilterApplyRequest,
    FilterResultOut,
    ObjectOut,
    OutcomeOut,
    RatingIn,
    RatingOut,
    ReattributionOut,
    ScoreOut,
    TreeNodeOut,
    UserOut,
)

_REJECTION_STATUS = {
    RejectReason.NOT_CREATOR: 403,
    RejectReason.UNKNOWN_OBJECT: 404,
}


def _outcome_out(outcome: EditOutcome, views=None) -> OutcomeOut:
    conflict_views = {v.conflict: v for v in (views or [])}
    conflicts = []
    for c in outcome.conflicts:
        view = conflict_views.get(c)
        conflicts.append(ConflictOut(
            object=c.obj.render(), kind=c.kind.value, via_measure=c.via_measure,
            advisory=c.advisory,
            rendered=view.rendered if view else "",
            corrective_template=view.corrective_template if view else None))
    report = None
    if outcome.clone_report:
        r = outcome.clone_report
        report = CloneReportOut(
            original_term=r.original_term.render() if r.original_term else None,
            clones=[CloneOut(new_term=c.new_term.render(), for_user=c.for_user,
                             dropped_definition=c.dropped_definition.render()
                             if c.dropped_definition else None)
                    for c in r.clones],
            rewritten_statements=[i.render() for i in r.rewritten_statements],
            reattributed=[ReattributionOut(old_statement=x.old_statement.render(),
                                           new_statement=x.new_statement.render(),
                                           for_user=x.for_user)
                          for x in r.reattributed])
    return OutcomeOut(
        status=outcome.status.value,
        reason=outcome.reason.value if outcome.reason else None,
        conflicts=conflicts,
        clone_report=report,
        created=[i.render() for i in outcome.created],
        removed=[i.render() for i in outcome.removed],
        warnings=list(outcome.warnings),
    )


def _tree_out(node: TreeNode, display: dict[str, str] | None = None) -> TreeNodeOut:
    return TreeNodeOut(
        label=node.label,
        link_kind=node.link_kind,
        creator=node.creator,
        display=(display or {}).get(node.label, "show"),
        children=[_tree_out(c, display) for c in sorted(node.children, key=lambda n: n.label)],
    )


def _response_out(response: CommandResponse) -> CommandResponseOut:
    return CommandResponseOut(
        outcome=_outcome_out(response.outcome, response.conflicts)
        if response.outcome else None,
        tree=_tree_out(response.tree) if response.tree else None,
        tree_text=response.tree_text,
        results=response.results,
        sequence=response.sequence,
    )


def create_app(engine: Engine, frontend_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="cokb", version="0.1.0")
    app.state.engine = engine

    @app.exception_handler(ParseError)
    async def _parse_error(_, exc: ParseError):
        return JSONResponse(status_code=400, content={
            "error": "parse-error", "detail": str(exc),
            "line": exc.line, "column": exc.column,
            "expected": exc.expected, "found": exc.found})

    @app.exception_handler(UnknownObjectError)
    async def _unknown(_, exc: UnknownObjectError):
        return JSONResponse(status_code=404, content={
            "error": "unknown-object", "detail": str(exc)})

    @app.exception_handler(OutOfRangeError)
    async def _range(_, exc: OutOfRangeError):
        return JSONResponse(status_code=400, content={
            "error": "out-of-range", "detail": str(exc)})

    @app.exception_handler(IllTypedExpression)
    async def _illtyped(_, exc: IllTypedExpression):
        return JSONResponse(status_code=400, content={
            "error": "ill-typed-expression", "detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/users", response_model=list[UserOut])
    def users():
        return [UserOut(name=name, kind=s.kind.value)
                for name, s in sorted(engine.kb.sources.items())]

    @app.post("/commands", response_model=CommandResponseOut)
    def commands(request: CommandRequest, x_user: str = Header(...)):
        response = engine.execute(x_user, request.text)
        payload = _response_out(response)
        if response.outcome is not None and not response.outcome.accepted:
            status = _REJECTION_STATUS.get(response.outcome.reason, 409)
            return JSONResponse(status_code=status,
                                content=payload.model_dump())
        return payload

    @app.post("/draft/conflicts", response_model=DraftResponse)
    def draft_conflicts(request: CommandRequest, x_user: str = Header(...)):
        response = engine.dry_run(x_user, request.text)
        outcome = response.outcome
        out = _outcome_out(outcome, response.conflicts)
        return DraftResponse(
            would_accept=outcome.accepted,
            status=outcome.status.value,
            reason=out.reason,
            conflicts=out.conflicts,
            warnings=out.warnings,
        )

    @app.get("/objects", response_model=ObjectOut)
    def get_object(id: str = Query(...)):
        return _object_out(engine, id)

    @app.get("/specializations", response_model=CommandResponseOut)
    def specializations(root: str = Query(...), depth: int | None = None,
                        filter: str | None = None):
        key = engine._resolve_object_key(root)
        tree = engine.kb.hierarchy.specializations_of(key, depth)
        display = None
        if filter:
            fdef = engine.kb.filters.get(filter)
            if fdef is None:
                raise UnknownObjectError(filter)
            labels = _tree_labels(tree)
            display = dict(apply_filter(engine.kb, fdef, labels))
        from ..notation.render import render_tree

        return CommandResponseOut(tree=_tree_out(tree, display),
                                  tree_text=render_tree(tree))

    @app.get("/ratings", response_model=list[RatingOut])
    def get_ratings(object: str = Query(...)):
        _require_object(engine, object)
        out = []
        for r in engine.kb.ratings.values():
            if r.obj.render() == object:
                out.append(RatingOut(id=r.id.render(), rater=r.rater,
                                     object=object, criterion=r.criterion,
                                     value=float(r.value), date=r.date))
        return sorted(out, key=lambda r: (r.criterion, r.rater))

    @app.put("/ratings", response_model=CommandResponseOut)
    def put_rating(rating: RatingIn, x_user: str = Header(...)):
        from fractions import Fraction

        from ..notation.parser import format_fraction

        value = format_fraction(Fraction(rating.value).limit_denominator(10 ** 6))
        text = f"rate {rating.object} {rating.criterion} {value};"
        response = engine.execute(x_user, text)
        payload = _response_out(response)
        if not response.outcome.accepted:
            status = _REJECTION_STATUS.get(response.outcome.reason, 409)
            return JSONResponse(status_code=status, content=payload.model_dump())
        return payload

    @app.get("/scores", response_model=ScoreOut)
    def get_score(object: str = Query(...)):
        _require_object(engine, object)
        stmt_scores, user_scores = default_scores(engine.kb)
        stmt = engine.kb.statements.get(object)
        creator = stmt.creator if stmt else None
        return ScoreOut(object=object,
                        score=stmt_scores.get(object, 0.5),
                        creator=creator,
                        creator_score=user_scores.get(creator) if creator else None)

    @app.post("/filter/apply", response_model=list[FilterResultOut])
    def filter_apply(request: FilterApplyRequest):
        fdef = engine.kb.filters.get(request.filter)
        if fdef is None:
            raise UnknownObjectError(request.filter)
        return [FilterResultOut(object=key, display=action)
                for key, action in apply_filter(engine.kb, fdef, request.objects)]

    @app.get("/snapshot")
    def get_snapshot():
        return {"snapshot": snapshot(engine.kb), "hash": engine.snapshot_hash()}

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(frontend_dir), html=True), name="ui")

    return app


def _tree_labels(node: TreeNode) -> list[str]:
    labels = [node.label]
    for child in node.children:
        labels.extend(_tree_labels(child))
    return labels


def _require_object(engine: Engine, key: str) -> None:
    kb = engine.kb
    if key in kb.statements or key in kb.terms or key in kb.sources \
            or kb.hierarchy.has(key):
        return
    raise UnknownObjectError(key)


def _object_out(engine: Engine, key: str) -> ObjectOut:
    kb = engine.kb
    if key in kb.statements:
        s = kb.statements[key]
        try:
            rendered = render_fe(s)
        except ValueError:
            rendered = key
        structured = {
            "kind": s.kind.value,
            "creator": s.creator,
            "believer": s.believer,
            "interpreted_source": s.interpreted_source,
            "created": s.created,
            "contexts": [c.kind.value for c in s.contexts],
        }
        return ObjectOut(id=key, object_kind="statement", rendered=rendered,
                         structured=structured)
    if key in kb.terms:
        t = kb.terms[key]
        return ObjectOut(id=key, object_kind="term", rendered=key, structured={
            "names": sorted(t.names),
            "definitions": [d.render() for d in t.definitions],
            "creator": t.creator,
            "clone_of": kb.clone_origin.get(key),
        })
    if key in kb.sources:
        s = kb.sources[key]
        return ObjectOut(id=key, object_kind="source", rendered=key,
                         structured={"kind": s.kind.value})
    for r in kb.ratings.values():
        if r.id.render() == key:
            return ObjectOut(id=key, object_kind="rating", rendered=key, structured={
                "rater": r.rater, "object": r.obj.render(),
                "criterion": r.criterion, "value": float(r.value), "date": r.date})
    if kb.hierarchy.has(key):
        return ObjectOut(id=key, object_kind="term", rendered=key,
                         structured={"informal": True})
    raise UnknownObjectError(key)
