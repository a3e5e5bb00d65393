"""The single extended-specialization hierarchy over all KB objects.

Terms (formal and informal), statements and sources all live in one
graph so that any pair of objects can be compared.  Several link kinds
are maintained: subtype/instance between terms, logical-deduction
between formal statements, informal-generalization toward informal
objects, plus equivalence, example (instantiation), subprocess, and the
corrective/argumentation relations carried by meta statements.

Strict specialization links must stay acyclic; equivalence links are
symmetric.  Object keys are rendered identifiers for formal objects and
quoted names for informal ones.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .model import Ident, TermRef


class LinkKind(str, Enum):
    SUBTYPE = "subtype"
    INSTANCE = "instance"
    LOGICAL_DEDUCTION_OF = "logical-deduction-of"
    INFORMAL_GENERALIZATION = "informal-generalization"
    SUBPROCESS = "subprocess"
    EQUIVALENCE = "equivalence"
    EXAMPLE = "example"
    CORRECTIVE_RESTRICTION = "corrective_restriction"
    CORRECTIVE_GENERALIZATION = "corrective_generalization"
    CORRECTIVE_SPECIALIZATION = "corrective_specialization"
    ARGUMENT = "argument"
    OBJECTION = "objection"


# Links that must form a DAG (strict specialization / instantiation).
STRICT_KINDS = {
    LinkKind.SUBTYPE,
    LinkKind.INSTANCE,
    LinkKind.LOGICAL_DEDUCTION_OF,
    LinkKind.INFORMAL_GENERALIZATION,
    LinkKind.SUBPROCESS,
    LinkKind.EXAMPLE,
}

# Anchor kinds acceptable when adding a term (subprocess for process types).
TERM_ANCHOR_KINDS = {
    LinkKind.SUBTYPE,
    LinkKind.INSTANCE,
    LinkKind.EQUIVALENCE,
    LinkKind.INFORMAL_GENERALIZATION,
}

# Upward closure used for term subsumption.
SUBSUMPTION_KINDS = {
    LinkKind.SUBTYPE,
    LinkKind.INSTANCE,
    LinkKind.EQUIVALENCE,
    LinkKind.INFORMAL_GENERALIZATION,
}

# Traversed by `spec of` queries (inverse direction).
SPEC_TREE_KINDS = {
    LinkKind.SUBTYPE,
    LinkKind.INSTANCE,
    LinkKind.LOGICAL_DEDUCTION_OF,
    LinkKind.INFORMAL_GENERALIZATION,
    LinkKind.EQUIVALENCE,
    LinkKind.EXAMPLE,
}

# Chains that make a redundancy/inconsistency explicit.
RELATED_KINDS = {
    LinkKind.SUBTYPE,
    LinkKind.INSTANCE,
    LinkKind.LOGICAL_DEDUCTION_OF,
    LinkKind.INFORMAL_GENERALIZATION,
    LinkKind.EQUIVALENCE,
    LinkKind.EXAMPLE,
    LinkKind.CORRECTIVE_RESTRICTION,
    LinkKind.CORRECTIVE_GENERALIZATION,
    LinkKind.CORRECTIVE_SPECIALIZATION,
    LinkKind.ARGUMENT,
    LinkKind.OBJECTION,
}


class HierarchyError(ValueError):
    pass


class UnknownObjectError(HierarchyError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"unknown object: {key}")


class NoAnchorError(HierarchyError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"term {key} has no anchoring link")


class CycleIntroducedError(HierarchyError):
    def __init__(self, frm: str, to: str):
        super().__init__(f"link {frm} -> {to} would close a specialization cycle")


def ref_key(ref: TermRef) -> str:
    """Hierarchy key of a term reference (informal names are quoted)."""
    if ref.ident is not None:
        return ref.ident.render()
    return f'"{ref.name}"'


def ident_key(ident: Ident) -> str:
    return ident.render()


@dataclass(frozen=True)
class HierarchyLink:
    """Directed link; `frm` specializes (or argues about) `to`."""

    kind: LinkKind
    frm: str
    to: str
    creator: str
    origin: Ident | None = None  # statement that carries the link

    def __deepcopy__(self, memo):
        return self


@dataclass
class TreeNode:
    label: str
    link_kind: str | None = None
    creator: str | None = None
    children: list["TreeNode"] = field(default_factory=list)


@dataclass(frozen=True)
class Placement:
    direct_generalizations: tuple[Ident, ...]
    direct_specializations: tuple[Ident, ...]


def classify_statement(stmt, kb) -> Placement:
    """Where a statement sits in the stored specialization order."""
    from .matcher import placement_detail

    detail = placement_detail(stmt, kb)
    return Placement(
        tuple(sorted((s.id for s, _ in detail.generalizations), key=str)),
        tuple(sorted((s.id for s, _ in detail.specializations), key=str)),
    )


class Hierarchy:
    def __init__(self):
        self._objects: set[str] = set()
        self._up: dict[str, list[HierarchyLink]] = {}
        self._down: dict[str, list[HierarchyLink]] = {}
        self.version = 0  # bumped on any change; closure caches key off it

    # -- objects ---------------------------------------------------------

    def add_object(self, key: str) -> None:
        self._objects.add(key)
        self.version += 1

    def remove_object(self, key: str) -> None:
        self._objects.discard(key)
        for link in list(self._up.get(key, ())) + list(self._down.get(key, ())):
            self.remove_link(link)
        self.version += 1

    def has(self, key: str) -> bool:
        return key in self._objects

    def objects(self) -> set[str]:
        return set(self._objects)

    # -- links -----------------------------------------------------------

    def links(self) -> list[HierarchyLink]:
        return [l for ls in self._up.values() for l in ls]

    def add_link(self, link: HierarchyLink) -> None:
        if link.frm not in self._objects:
            raise UnknownObjectError(link.frm)
        if link.to not in self._objects:
            raise UnknownObjectError(link.to)
        if link.kind in STRICT_KINDS and self._reaches(link.to, link.frm, STRICT_KINDS):
            raise CycleIntroducedError(link.frm, link.to)
        self._up.setdefault(link.frm, []).append(link)
        self._down.setdefault(link.to, []).append(link)
        self.version += 1

    def remove_link(self, link: HierarchyLink) -> None:
        if link in self._up.get(link.frm, ()):
            self._up[link.frm].remove(link)
        if link in self._down.get(link.to, ()):
            self._down[link.to].remove(link)
        self.version += 1

    def remove_links_of_origin(self, origin: Ident) -> None:
        for link in [l for l in self.links() if l.origin == origin]:
            self.remove_link(link)

    def add_term(self, key: str, anchors: list[HierarchyLink],
                 is_process: bool = False) -> None:
        """Insert a term; Rule 2 demands at least one anchoring link."""
        allowed = TERM_ANCHOR_KINDS | ({LinkKind.SUBPROCESS} if is_process else set())
        anchors = [a for a in anchors if a.kind in allowed]
        if not anchors:
            raise NoAnchorError(key)
        for a in anchors:
            other = a.to if a.frm == key else a.frm
            if other not in self._objects:
                raise UnknownObjectError(other)
        self.add_object(key)
        try:
            for a in anchors:
                self.add_link(a)
        except HierarchyError:
            self.remove_object(key)
            raise

    # -- reachability ------------------------------------------------------

    def _neighbors_up(self, key: str, kinds: set[LinkKind]):
        for link in self._up.get(key, ()):
            if link.kind in kinds:
                yield link.to
        # equivalence is symmetric
        if LinkKind.EQUIVALENCE in kinds:
            for link in self._down.get(key, ()):
                if link.kind is LinkKind.EQUIVALENCE:
                    yield link.frm

    def _reaches(self, start: str, goal: str, kinds: set[LinkKind]) -> bool:
        return goal in self.up_closure(start, kinds)

    def up_closure(self, key: str, kinds: set[LinkKind] | None = None) -> set[str]:
        """All objects reachable upward from `key`, including itself."""
        kinds = kinds or SUBSUMPTION_KINDS
        seen = {key}
        queue = deque([key])
        while queue:
            cur = queue.popleft()
            for nxt in self._neighbors_up(cur, kinds):
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen

    def down_closure(self, key: str, kinds: set[LinkKind] | None = None) -> set[str]:
        """All objects reachable downward from `key`, including itself."""
        kinds = kinds or SUBSUMPTION_KINDS
        seen = {key}
        queue = deque([key])
        while queue:
            cur = queue.popleft()
            neighbors = [l.frm for l in self._down.get(cur, ()) if l.kind in kinds]
            if LinkKind.EQUIVALENCE in kinds:
                neighbors += [l.to for l in self._up.get(cur, ())
                              if l.kind is LinkKind.EQUIVALENCE]
            for nxt in neighbors:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen

    def anchored(self, key: str, roots: set[str]) -> bool:
        closure = self.up_closure(
            key, SUBSUMPTION_KINDS | {LinkKind.SUBPROCESS, LinkKind.LOGICAL_DEDUCTION_OF,
                                      LinkKind.EXAMPLE})
        return bool(closure & roots)

    def explicitly_related(self, a: str, b: str) -> bool:
        """True iff a chain of specialization/equivalence/example/corrective/
        argumentation links connects the two objects (undirected)."""
        for key in (a, b):
            if key not in self._objects:
                raise UnknownObjectError(key)
        if a == b:
            return True
        seen = {a}
        queue = deque([a])
        while queue:
            cur = queue.popleft()
            neighbors = [l.to for l in self._up.get(cur, ()) if l.kind in RELATED_KINDS]
            neighbors += [l.frm for l in self._down.get(cur, ()) if l.kind in RELATED_KINDS]
            for nxt in neighbors:
                if nxt == b:
                    return True
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return False

    def specializations_of(self, root: str, max_depth: int | None = None) -> TreeNode:
        """Tree of objects reachable by inverse extended-specialization links.

        Each object appears once (first encounter wins); nodes carry the
        link kind and creator of the link they were reached through.
        """
        if root not in self._objects:
            raise UnknownObjectError(root)
        tree = TreeNode(root)
        visited = {root}
        queue = deque([(tree, 0)])
        while queue:
            node, depth = queue.popleft()
            if max_depth is not None and depth >= max_depth:
                continue
            children: list[tuple[str, HierarchyLink]] = []
            for link in self._down.get(node.label, ()):
                if link.kind in SPEC_TREE_KINDS:
                    children.append((link.frm, link))
            for link in self._up.get(node.label, ()):
                if link.kind is LinkKind.EQUIVALENCE:
                    children.append((link.to, link))
            for key, link in sorted(children, key=lambda kv: kv[0]):
                if key in visited:
                    continue
                visited.add(key)
                child = TreeNode(key, link.kind.value, link.creator)
                node.children.append(child)
                queue.append((child, depth + 1))
        return tree

    def is_dag(self) -> bool:
        """Check the acyclicity invariant over strict specialization links."""
        color: dict[str, int] = {}

        def visit(key: str) -> bool:
            color[key] = 1
            for nxt in self._neighbors_up(key, STRICT_KINDS - {LinkKind.EQUIVALENCE}):
                state = color.get(nxt, 0)
                if state == 1:
                    return False
                if state == 0 and not visit(nxt):
                    return False
            color[key] = 2
            return True

        return all(visit(k) for k in self._objects if color.get(k, 0) == 0)
