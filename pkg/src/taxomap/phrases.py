"""Class-name normalization and root-phrase extraction.

A class name like "American football team in Finland" is a short noun
phrase. Its *root word* is the noun that carries the subject ("team");
its *root phrases* are that noun combined with subsets of its modifiers
and with trailing prepositional phrases:

    team, American team, football team, American football team,
    team in Finland

Parses come either from a precomputed annotation file or, as a fallback,
from a deterministic heuristic tagger restricted to this kind of noun
phrase. The heuristic never sees full sentences; names with no usable
noun raise NoRootError and are skipped upstream.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from itertools import combinations

from .errors import LoadError, NoRootError, ProviderFormatError

POS_TAGS = ("NOUN", "PROPN", "ADJ", "ADP", "NUM", "CCONJ", "PART", "OTHER")

# pure numbers, decimals, ordinals, decades: 3, 3.5, 20th, 2nd, 1990s
_NUM_RE = re.compile(r"^\d+([.,]\d+)*(st|nd|rd|th|s)?$", re.IGNORECASE)

# at most this many pre-head modifiers are enumerated exhaustively;
# beyond it only single-modifier and all-modifier combinations are kept
MODIFIER_CAP = 6


@dataclass(frozen=True, slots=True)
class Token:
    text: str
    pos: str
    index: int


@dataclass(frozen=True, slots=True)
class ParsedName:
    """Dependency tree over the tokens of one class name.

    ``head_of[i]`` is the index of token i's head; the root points to
    itself. The root token is always a NOUN or PROPN.
    """

    tokens: tuple[Token, ...]
    head_of: tuple[int, ...]
    root_index: int


@dataclass(frozen=True, slots=True)
class RootPhraseSet:
    """Ordered, deduplicated candidate phrases for one class name.

    The root word comes first, then modifier combinations, then
    prepositional extensions. Every phrase contains the root word and is
    an order-preserving subsequence of the name's tokens.
    """

    root_word: str
    phrases: tuple[str, ...]


def normalize_label(raw: str) -> str:
    """Underscores to spaces, whitespace runs collapsed, ends trimmed.

    Casing is preserved: "Opera_house_in_Puerto_Rico" becomes
    "Opera house in Puerto Rico".
    """
    out = " ".join(raw.replace("_", " ").split())
    if not out:
        raise ValueError(f"label {raw!r} is empty after normalization")
    return out


def _load_lexicon(path) -> dict[str, str]:
    lexicon: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 2 or cols[1] not in POS_TAGS:
                raise LoadError("malformed lexicon row", str(path), lineno)
            lexicon[cols[0].casefold()] = cols[1]
    return lexicon


def _load_prepositions(path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip().casefold() for line in fh if line.strip())


@lru_cache(maxsize=1)
def default_lexicon() -> dict[str, str]:
    with resources.as_file(resources.files("taxomap.data") / "pos_lexicon.tsv") as p:
        return _load_lexicon(p)


@lru_cache(maxsize=1)
def default_prepositions() -> frozenset[str]:
    with resources.as_file(resources.files("taxomap.data") / "prepositions.txt") as p:
        return _load_prepositions(p)


def heuristic_parse(
    name: str,
    lexicon: dict[str, str] | None = None,
    prepositions: frozenset[str] | None = None,
) -> ParsedName:
    """Deterministic fallback parse for a normalized class name.

    Tags each space-separated token (lexicon entry, then preposition
    list, then numeric pattern, then capitalized-non-initial PROPN,
    else NOUN) and picks as root the last NOUN/PROPN before the first
    preposition. Pre-head tokens depend on the root; each preposition
    heads the tokens that follow it and attaches to the root.
    """
    if lexicon is None:
        lexicon = default_lexicon()
    if prepositions is None:
        prepositions = default_prepositions()

    words = name.split(" ")
    if not words or words == [""]:
        raise NoRootError(f"no tokens in {name!r}")

    tags: list[str] = []
    for i, word in enumerate(words):
        folded = word.casefold()
        pos = lexicon.get(folded)
        if pos is None:
            if folded in prepositions:
                pos = "ADP"
            elif word[0].isdigit() and _NUM_RE.match(word):
                pos = "NUM"
            elif i > 0 and word[0].isupper():
                pos = "PROPN"
            else:
                pos = "NOUN"
        tags.append(pos)

    adp_positions = [i for i, t in enumerate(tags) if t == "ADP"]
    first_adp = adp_positions[0] if adp_positions else len(words)
    root = None
    for i in range(first_adp - 1, -1, -1):
        if tags[i] in ("NOUN", "PROPN"):
            root = i
            break
    if root is None:
        for i in range(len(words) - 1, -1, -1):
            if tags[i] in ("NOUN", "PROPN"):
                root = i
                break
    if root is None:
        raise NoRootError(f"no noun root in {name!r}")

    heads = [root] * len(words)
    current_adp = None
    for i, tag in enumerate(tags):
        if tag == "ADP":
            current_adp = i
            heads[i] = root
        elif current_adp is not None and i != root:
            heads[i] = current_adp
    heads[root] = root

    tokens = tuple(Token(w, t, i) for i, (w, t) in enumerate(zip(words, tags)))
    return ParsedName(tokens, tuple(heads), root)


class AnnotationProvider:
    """Read-only lookup of precomputed parses keyed by normalized name.

    File format: ``name<TAB>pos_tags(space-sep)<TAB>head_indices(space-sep)``.
    Entries are validated when first used; a malformed entry (bad tag,
    length mismatch, no unique self-headed root, unreachable token, or a
    cycle) raises ProviderFormatError.
    """

    def __init__(self, entries: dict[str, tuple[str, str]]):
        self._raw = entries
        self._cache: dict[str, ParsedName] = {}

    @classmethod
    def load(cls, path) -> "AnnotationProvider":
        entries: dict[str, tuple[str, str]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line.strip():
                    continue
                cols = line.split("\t")
                if len(cols) != 3:
                    raise LoadError("malformed annotation row", str(path), lineno)
                entries[cols[0]] = (cols[1], cols[2])
        return cls(entries)

    @classmethod
    def empty(cls) -> "AnnotationProvider":
        return cls({})

    def get(self, name: str) -> ParsedName | None:
        if name not in self._raw:
            return None
        if name in self._cache:
            return self._cache[name]
        parsed = self._parse_entry(name, *self._raw[name])
        self._cache[name] = parsed
        return parsed

    def _parse_entry(self, name: str, tag_field: str, head_field: str) -> ParsedName:
        words = name.split(" ")
        tags = tag_field.split(" ")
        try:
            heads = [int(h) for h in head_field.split(" ")]
        except ValueError:
            raise ProviderFormatError(f"non-integer head index for {name!r}")
        if len(tags) != len(words) or len(heads) != len(words):
            raise ProviderFormatError(f"field lengths disagree for {name!r}")
        for t in tags:
            if t not in POS_TAGS:
                raise ProviderFormatError(f"unknown pos tag {t!r} for {name!r}")
        roots = [i for i, h in enumerate(heads) if h == i]
        if len(roots) != 1:
            raise ProviderFormatError(f"parse of {name!r} must have exactly one root")
        root = roots[0]
        if tags[root] not in ("NOUN", "PROPN"):
            raise ProviderFormatError(f"root of {name!r} is not a noun")
        for i, h in enumerate(heads):
            if not 0 <= h < len(words):
                raise ProviderFormatError(f"head index out of range for {name!r}")
            # walking to the root must terminate: cycles never reach it
            seen = {i}
            node = i
            while node != root:
                node = heads[node]
                if node in seen:
                    raise ProviderFormatError(f"head cycle in parse of {name!r}")
                seen.add(node)
        tokens = tuple(Token(w, t, i) for i, (w, t) in enumerate(zip(words, tags)))
        return ParsedName(tokens, tuple(heads), root)


def annotate(
    name: str,
    provider: AnnotationProvider | None = None,
    lexicon: dict[str, str] | None = None,
    prepositions: frozenset[str] | None = None,
) -> ParsedName:
    """Provider entry when one exists, heuristic parse otherwise."""
    if provider is not None:
        parsed = provider.get(name)
        if parsed is not None:
            return parsed
    return heuristic_parse(name, lexicon, prepositions)


def extract_root_phrases(parsed: ParsedName) -> RootPhraseSet:
    """Enumerate the candidate phrases of a parsed class name.

    Combines the root word with every order-preserving subset of its
    pre-head modifier dependents (capped at MODIFIER_CAP, after which only
    single-modifier and all-modifier combinations survive) and with each
    prepositional subtree. Pure and deterministic.
    """
    tokens = parsed.tokens
    root = parsed.root_index
    children: dict[int, list[int]] = {}
    for i, h in enumerate(parsed.head_of):
        if i != h:
            children.setdefault(h, []).append(i)

    def subtree(i: int) -> list[int]:
        out = [i]
        stack = [i]
        while stack:
            node = stack.pop()
            for c in children.get(node, ()):
                out.append(c)
                stack.append(c)
        return sorted(out)

    modifiers: list[int] = []
    adp_children: list[int] = []
    for c in sorted(children.get(root, ())):
        if tokens[c].pos == "ADP":
            adp_children.append(c)
        elif c < root:
            modifiers.append(c)

    def phrase_for(indices: set[int]) -> str:
        return " ".join(tokens[i].text for i in sorted(indices | {root}))

    phrases: list[str] = [tokens[root].text]
    if len(modifiers) <= MODIFIER_CAP:
        combos = (
            combo
            for size in range(1, len(modifiers) + 1)
            for combo in combinations(modifiers, size)
        )
    else:
        singles = [(m,) for m in modifiers]
        combos = iter(singles + [tuple(modifiers)])
    for combo in combos:
        indices: set[int] = set()
        for m in combo:
            indices.update(subtree(m))
        phrases.append(phrase_for(indices))
    for adp in adp_children:
        phrases.append(phrase_for(set(subtree(adp))))

    unique = tuple(dict.fromkeys(phrases))
    return RootPhraseSet(tokens[root].text, unique)
