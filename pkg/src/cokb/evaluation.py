"""Ratings, executable global measures, and display filters.

Measures are explicit expression trees, not hard-coded formulas: each
user can combine the basic rating functions to their own taste.  The
default measure scores a statement as the mean of its `acceptance`
ratings weighted by the raters' user scores, and a user as the damped
mean of their statements' scores; the mutual dependence is resolved by
fixpoint iteration.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .hierarchy import LinkKind
from .kb import FilterDef, KnowledgeBase, Rating
from .model import EditOutcome, Ident, OutcomeStatus, RejectReason, rejected

DAMPING = 0.5
TOLERANCE = 1e-9
MAX_ITERATIONS = 100
DEFAULT_SCORE = 0.5
DEFAULT_CRITERION = "acceptance"


class IllTypedExpression(ValueError):
    pass


class OutOfRangeError(ValueError):
    pass


def submit_rating(kb: KnowledgeBase, rater: str, obj: Ident, criterion: str,
                  value: Fraction, now: str) -> EditOutcome:
    """Store one rating; resubmission by the same rater overwrites."""
    if rater not in kb.sources:
        return rejected(RejectReason.UNKNOWN_OBJECT)
    key = obj.render()
    if key not in kb.statements and key not in kb.terms and key not in kb.sources:
        return rejected(RejectReason.UNKNOWN_OBJECT)
    if not (0 <= value <= 1):
        raise OutOfRangeError(f"rating value {value} outside [0, 1]")
    slot = (rater, key, criterion)
    existing = kb.ratings.get(slot)
    if existing is not None:
        kb.ratings[slot] = Rating(existing.id, rater, obj, criterion, value, now)
        return EditOutcome(OutcomeStatus.ACCEPTED, created=(existing.id,))
    rid = kb.next_rating_id(rater)
    kb.ratings[slot] = Rating(rid, rater, obj, criterion, value, now)
    return EditOutcome(OutcomeStatus.ACCEPTED, created=(rid,))


def ratings_for(kb: KnowledgeBase, key: str, criterion: str) -> list[Rating]:
    return sorted((r for r in kb.ratings.values()
                   if r.obj.render() == key and r.criterion == criterion),
                  key=lambda r: (r.rater, r.id.render()))


def default_scores(kb: KnowledgeBase, damping: float = DAMPING,
                   tol: float = TOLERANCE,
                   max_iter: int = MAX_ITERATIONS) -> tuple[dict[str, float], dict[str, float]]:
    """Fixpoint of the mutual statement/user scoring scheme.

    statement score = mean of its acceptance ratings weighted by the
    raters' user scores (0.5 when unrated); user score = damped mean of
    the scores of the user's statements.
    """
    users = sorted(kb.sources)
    user_score = {u: DEFAULT_SCORE for u in users}
    created: dict[str, list[str]] = {u: [] for u in users}
    for key, stmt in kb.statements.items():
        created.setdefault(stmt.creator, []).append(key)

    def statement_scores(us: dict[str, float]) -> dict[str, float]:
        scores = {}
        for key in kb.statements:
            rs = ratings_for(kb, key, DEFAULT_CRITERION)
            if not rs:
                scores[key] = DEFAULT_SCORE
                continue
            weights = [us.get(r.rater, DEFAULT_SCORE) for r in rs]
            total = sum(weights)
            if total == 0:
                scores[key] = DEFAULT_SCORE
            else:
                scores[key] = sum(w * float(r.value) for w, r in zip(weights, rs)) / total
        return scores

    stmt_score = statement_scores(user_score)
    for _ in range(max_iter):
        nxt_user = {}
        for u in users:
            own = created.get(u, [])
            mean = (sum(stmt_score[k] for k in own) / len(own)) if own else DEFAULT_SCORE
            nxt_user[u] = damping * user_score[u] + (1 - damping) * mean
        delta = max((abs(nxt_user[u] - user_score[u]) for u in users), default=0.0)
        user_score = nxt_user
        stmt_score = statement_scores(user_score)
        if delta < tol:
            break
    return stmt_score, user_score


@dataclass
class _Env:
    obj: str
    rater: str | None = None
    creator: str | None = None


def eval_object(kb: KnowledgeBase, expr, obj: Ident | str) -> float:
    """Evaluate a measure expression for one object; scalar result."""
    key = obj.render() if isinstance(obj, Ident) else obj
    stmt = kb.statements.get(key)
    creator = stmt.creator if stmt else None
    scores = None

    def need_scores():
        nonlocal scores
        if scores is None:
            scores = default_scores(kb)
        return scores

    def ev(node, env: _Env):
        if isinstance(node, (int, float, Fraction)):
            return float(node)
        if isinstance(node, str):
            if node == "object":
                return env.obj
            if node == "rater":
                if env.rater is None:
                    raise IllTypedExpression("'rater' used outside a weight expression")
                return env.rater
            if node == "creator":
                if env.creator is None:
                    raise IllTypedExpression("'creator' of an unknown object")
                return env.creator
            if node == "score":
                return need_scores()[0].get(env.obj, DEFAULT_SCORE)
            raise IllTypedExpression(f"unknown symbol {node!r}")
        if not isinstance(node, tuple) or not node:
            raise IllTypedExpression(f"unexpected expression node {node!r}")
        head, *args = node
        if head == "literal" and len(args) == 1:
            return ev(args[0], env)
        if head == "ratings" and len(args) == 2:
            target = ev(args[0], env)
            return [float(r.value) for r in ratings_for(kb, target, str(args[1]))]
        if head == "mean" and len(args) == 1:
            if isinstance(args[0], str) and not args[0] in ("object",):
                values = [float(r.value) for r in ratings_for(kb, env.obj, args[0])]
            else:
                values = ev(args[0], env)
            if not isinstance(values, list):
                raise IllTypedExpression("mean needs a list")
            return sum(values) / len(values) if values else DEFAULT_SCORE
        if head == "wmean" and len(args) == 2:
            criterion = str(args[0])
            rs = ratings_for(kb, env.obj, criterion)
            if not rs:
                return DEFAULT_SCORE
            weights = []
            for r in rs:
                w = ev(args[1], _Env(env.obj, rater=r.rater, creator=env.creator))
                weights.append(float(w))
            total = sum(weights)
            if total == 0:
                return DEFAULT_SCORE
            return sum(w * float(r.value) for w, r in zip(weights, rs)) / total
        if head == "userscore" and len(args) == 1:
            who = ev(args[0], env) if isinstance(args[0], tuple) else args[0]
            if who == "rater":
                who = env.rater
            elif who == "creator":
                who = env.creator
            if not isinstance(who, str) or who is None:
                raise IllTypedExpression("userscore needs a user")
            return need_scores()[1].get(who, DEFAULT_SCORE)
        if head == "count-unobjected-arguments" and len(args) == 1:
            target = ev(args[0], env)
            return float(count_unobjected_arguments(kb, target))
        if head == "score" and len(args) == 1:
            target = ev(args[0], env)
            return need_scores()[0].get(target, DEFAULT_SCORE)
        if head in ("+", "-", "*", "/", "min", "max"):
            values = [ev(a, env) for a in args]
            if not all(isinstance(v, float) for v in values):
                raise IllTypedExpression(f"{head} needs scalars")
            if head == "+":
                return sum(values)
            if head == "-":
                return values[0] - sum(values[1:]) if len(values) > 1 else -values[0]
            if head == "*":
                out = 1.0
                for v in values:
                    out *= v
                return out
            if head == "/":
                if len(values) != 2:
                    raise IllTypedExpression("/ needs two operands")
                if values[1] == 0:
                    raise IllTypedExpression("division by zero")
                return values[0] / values[1]
            if head == "min":
                return min(values)
            return max(values)
        raise IllTypedExpression(f"unknown operator {head!r}")

    result = ev(expr, _Env(key, creator=creator))
    if not isinstance(result, float):
        raise IllTypedExpression("measure must be scalar-valued")
    return result


def eval_predicate(kb: KnowledgeBase, expr, obj: str) -> bool:
    """Evaluate a filter predicate for one object."""
    if not isinstance(expr, tuple) or not expr:
        raise IllTypedExpression("predicate must be a comparison")
    head, *args = expr
    if head in ("and", "or"):
        values = [eval_predicate(kb, a, obj) for a in args]
        return all(values) if head == "and" else any(values)
    if head == "not" and len(args) == 1:
        return not eval_predicate(kb, args[0], obj)
    if head in (">=", "<=", ">", "<", "="):
        if len(args) != 2:
            raise IllTypedExpression(f"{head} needs two operands")
        a = eval_object(kb, args[0], obj)
        b = eval_object(kb, args[1], obj)
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b, "=": a == b}[head]
    raise IllTypedExpression(f"unknown predicate {head!r}")


def apply_filter(kb: KnowledgeBase, f: FilterDef, results: list[str]) -> list[tuple[str, str]]:
    """Tag objects failing the predicate with the filter's display action;
    input order is preserved."""
    out = []
    for key in results:
        visible = eval_predicate(kb, f.expr, key)
        out.append((key, "show" if visible else f.action))
    return out


def count_unobjected_arguments(kb: KnowledgeBase, key: str) -> int:
    """Arguments attached to an object that carry no objection."""
    count = 0
    for link in kb.hierarchy.links():
        if link.kind is LinkKind.ARGUMENT and link.to == key:
            objections = [l for l in kb.hierarchy.links()
                          if l.kind is LinkKind.OBJECTION and l.to == link.frm]
            if not objections:
                count += 1
    return count
