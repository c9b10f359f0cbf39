"""Class hierarchies: loading, cycle repair, and ancestry queries.

Two graphs are held in this structure during a run: the large, noisy
source taxonomy and the small curated target ontology. Both are plain
DAGs over class ids with labels, optional instance counts, and an
optional article-membership relation.
"""

from __future__ import annotations

import io
import os
from collections.abc import Iterable
from dataclasses import dataclass

from .errors import LoadError, NotAChainError, UnknownClassError

SOURCE_TAXONOMY = "SOURCE_TAXONOMY"
TARGET_ONTOLOGY = "TARGET_ONTOLOGY"

LineSource = str | os.PathLike | Iterable[str]


@dataclass(frozen=True, slots=True)
class OntologyClass:
    id: str
    label: str
    source: str = SOURCE_TAXONOMY
    instance_count: int | None = None


@dataclass(frozen=True, slots=True)
class CycleReport:
    removed_edges: tuple[tuple[str, str], ...]
    cycle_count: int


class TaxonomyGraph:
    """Immutable-after-construction class hierarchy.

    ``parents`` maps a child id to the set of its parent ids. Membership
    titles are stored verbatim; typing providers key on the exact title.
    Safe for unlimited concurrent readers once built.
    """

    __slots__ = ("classes", "parents", "membership", "root", "warnings", "_children", "_depths")

    def __init__(
        self,
        classes: dict[str, OntologyClass],
        parents: dict[str, frozenset[str]],
        membership: dict[str, frozenset[str]] | None = None,
        root: str | None = None,
        warnings: int = 0,
    ):
        self.classes = classes
        self.parents = parents
        self.membership = membership or {}
        self.root = root
        self.warnings = warnings
        self._children: dict[str, tuple[str, ...]] | None = None
        self._depths: dict[str, int] = {}

    def __contains__(self, class_id: str) -> bool:
        return class_id in self.classes

    def __len__(self) -> int:
        return len(self.classes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TaxonomyGraph):
            return NotImplemented
        return (
            self.classes == other.classes
            and self.parents == other.parents
            and self.membership == other.membership
            and self.root == other.root
        )

    def ids(self) -> list[str]:
        """All class ids in ascending order (the canonical iteration order)."""
        return sorted(self.classes)

    def parents_of(self, class_id: str) -> frozenset[str]:
        self._require(class_id)
        return self.parents.get(class_id, frozenset())

    def label_of(self, class_id: str) -> str:
        self._require(class_id)
        return self.classes[class_id].label

    def instance_count_of(self, class_id: str) -> int | None:
        self._require(class_id)
        return self.classes[class_id].instance_count

    def members_of(self, class_id: str) -> frozenset[str]:
        self._require(class_id)
        return self.membership.get(class_id, frozenset())

    def children_of(self, class_id: str) -> tuple[str, ...]:
        self._require(class_id)
        if self._children is None:
            children: dict[str, list[str]] = {}
            for child in sorted(self.parents):
                for parent in self.parents[child]:
                    children.setdefault(parent, []).append(child)
            self._children = {p: tuple(sorted(cs)) for p, cs in children.items()}
        return self._children.get(class_id, ())

    def ancestors_of(self, class_id: str) -> set[str]:
        """All strict ancestors of ``class_id`` (transitive parents)."""
        self._require(class_id)
        seen: set[str] = set()
        stack = list(self.parents.get(class_id, ()))
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            stack.extend(self.parents.get(node, ()))
        return seen

    def is_strict_ancestor(self, a: str, b: str) -> bool:
        """True iff ``a`` is reachable from ``b`` along parent edges and a != b."""
        self._require(a)
        self._require(b)
        if a == b:
            return False
        seen: set[str] = set()
        stack = list(self.parents.get(b, ()))
        while stack:
            node = stack.pop()
            if node == a:
                return True
            if node in seen:
                continue
            seen.add(node)
            stack.extend(self.parents.get(node, ()))
        return False

    def depth(self, class_id: str) -> int:
        """Length of the longest parent chain from ``class_id`` to a parentless class.

        Longest (not shortest) so that diamond inheritance does not make a
        specific class look shallow. Requires an acyclic graph.
        """
        self._require(class_id)
        depths = self._depths
        if class_id in depths:
            return depths[class_id]
        stack = [class_id]
        while stack:
            node = stack[-1]
            if node in depths:
                stack.pop()
                continue
            pending = [p for p in self.parents.get(node, ()) if p not in depths]
            if pending:
                stack.extend(pending)
                continue
            parent_depths = [depths[p] for p in self.parents.get(node, ())]
            depths[node] = max(parent_depths) + 1 if parent_depths else 0
            stack.pop()
        return depths[class_id]

    def deepest_on_chain(self, classes: Iterable[str]) -> str:
        """The unique member of an ancestor chain with no descendant inside the set.

        Raises NotAChainError when any two members are incomparable. Sets
        passed here are small (a handful of candidate classes), so the
        pairwise check is exhaustive rather than clever.
        """
        members = sorted(set(classes))
        if not members:
            raise NotAChainError("empty class set")
        for i, a in enumerate(members):
            for b in members[i + 1 :]:
                if not self.is_strict_ancestor(a, b) and not self.is_strict_ancestor(b, a):
                    raise NotAChainError(f"{a!r} and {b!r} are incomparable")
        deepest = members[0]
        for candidate in members[1:]:
            if self.is_strict_ancestor(deepest, candidate):
                deepest = candidate
        return deepest

    def _require(self, class_id: str) -> None:
        if class_id not in self.classes:
            raise UnknownClassError(f"unknown class id: {class_id!r}")


def _open_lines(source: LineSource):
    if isinstance(source, (str, os.PathLike)):
        return open(source, encoding="utf-8")
    return io.StringIO("".join(line if line.endswith("\n") else line + "\n" for line in source))


def _source_name(source: LineSource) -> str:
    if isinstance(source, (str, os.PathLike)):
        return os.fspath(source)
    return "<stream>"


def load_taxonomy(
    edges: LineSource | None,
    labels: LineSource,
    membership: LineSource | None = None,
    *,
    mode: str = "strict",
    source: str = SOURCE_TAXONOMY,
    root: str | None = None,
) -> TaxonomyGraph:
    """Build a TaxonomyGraph from tab-separated edge, label, and membership files.

    In lenient mode, unknown edge or membership endpoints create stub
    classes (label = id) and malformed rows are skipped and counted as
    warnings. In strict mode both are errors. The result is independent
    of input row order.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"mode must be 'strict' or 'lenient', got {mode!r}")
    strict = mode == "strict"
    warnings = 0

    classes: dict[str, OntologyClass] = {}
    label_path = _source_name(labels)
    with _open_lines(labels) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) not in (2, 3) or not cols[0] or not cols[1].strip():
                if strict:
                    raise LoadError("malformed label row", label_path, lineno)
                warnings += 1
                continue
            cid, label = cols[0], cols[1]
            count: int | None = None
            if len(cols) == 3 and cols[2] != "":
                try:
                    count = int(cols[2])
                except ValueError:
                    if strict:
                        raise LoadError("malformed instance count", label_path, lineno)
                    warnings += 1
                    continue
                if count < 0:
                    if strict:
                        raise LoadError("negative instance count", label_path, lineno)
                    warnings += 1
                    continue
            new = OntologyClass(cid, label, source, count)
            old = classes.get(cid)
            if old is None:
                classes[cid] = new
            elif old != new:
                if strict:
                    raise LoadError(f"duplicate id {cid!r} with conflicting label", label_path, lineno)
                warnings += 1
                # keep the lexicographically smaller row so loading stays order-insensitive
                classes[cid] = min(old, new, key=lambda c: (c.label, c.instance_count is None, c.instance_count or 0))

    parents: dict[str, set[str]] = {}
    if edges is not None:
        edges_path = _source_name(edges)
        with _open_lines(edges) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                cols = line.split("\t")
                if len(cols) != 2 or not cols[0] or not cols[1]:
                    if strict:
                        raise LoadError("malformed edge row", edges_path, lineno)
                    warnings += 1
                    continue
                child, parent = cols
                for endpoint in (child, parent):
                    if endpoint not in classes:
                        if strict:
                            raise LoadError(f"edge references unknown class {endpoint!r}", edges_path, lineno)
                        classes[endpoint] = OntologyClass(endpoint, endpoint, source)
                        warnings += 1
                parents.setdefault(child, set()).add(parent)

    members: dict[str, set[str]] = {}
    if membership is not None:
        members_path = _source_name(membership)
        with _open_lines(membership) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line.strip():
                    continue
                cols = line.split("\t")
                if len(cols) != 2 or not cols[0] or not cols[1]:
                    if strict:
                        raise LoadError("malformed membership row", members_path, lineno)
                    warnings += 1
                    continue
                cid, title = cols
                if cid not in classes:
                    if strict:
                        raise LoadError(f"membership references unknown class {cid!r}", members_path, lineno)
                    classes[cid] = OntologyClass(cid, cid, source)
                    warnings += 1
                members.setdefault(cid, set()).add(title)

    if root is not None:
        if root not in classes:
            raise LoadError(f"declared root {root!r} has no label entry", label_path)
        if parents.get(root):
            raise LoadError(f"declared root {root!r} has parents")

    return TaxonomyGraph(
        classes,
        {c: frozenset(ps) for c, ps in parents.items()},
        {c: frozenset(ts) for c, ts in members.items()},
        root=root,
        warnings=warnings,
    )


def break_cycles(graph: TaxonomyGraph) -> tuple[TaxonomyGraph, CycleReport]:
    """Remove the back edges of a ClassId-ordered DFS so the graph becomes acyclic.

    Traversal starts from every node in ascending id order and visits
    parents in ascending id order, so the removed edge set is the same on
    every run and platform. Acyclic input comes back unchanged.
    """
    WHITE, GRAY, BLACK = 0, 1, 2
    color: dict[str, int] = {}
    removed: list[tuple[str, str]] = []
    sorted_parents = {c: sorted(ps) for c, ps in graph.parents.items()}

    for start in sorted(graph.classes):
        if color.get(start, WHITE) != WHITE:
            continue
        # stack of (node, iterator position over its sorted parents)
        stack: list[list] = [[start, 0]]
        color[start] = GRAY
        while stack:
            node, idx = stack[-1]
            neighbors = sorted_parents.get(node, ())
            if idx >= len(neighbors):
                color[node] = BLACK
                stack.pop()
                continue
            stack[-1][1] += 1
            nxt = neighbors[idx]
            state = color.get(nxt, WHITE)
            if state == GRAY:
                removed.append((node, nxt))
            elif state == WHITE:
                color[nxt] = GRAY
                stack.append([nxt, 0])

    if not removed:
        return graph, CycleReport((), 0)

    removed_by_child: dict[str, set[str]] = {}
    for child, parent in removed:
        removed_by_child.setdefault(child, set()).add(parent)
    new_parents = {}
    for child, ps in graph.parents.items():
        kept = ps - removed_by_child.get(child, set())
        if kept:
            new_parents[child] = kept
    repaired = TaxonomyGraph(graph.classes, new_parents, graph.membership, graph.root, graph.warnings)
    return repaired, CycleReport(tuple(removed), len(removed))


def is_strict_ancestor(graph: TaxonomyGraph, a: str, b: str) -> bool:
    return graph.is_strict_ancestor(a, b)


def depth(graph: TaxonomyGraph, a: str) -> int:
    return graph.depth(a)


def deepest_on_chain(graph: TaxonomyGraph, classes: Iterable[str]) -> str:
    return graph.deepest_on_chain(classes)
