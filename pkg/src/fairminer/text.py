"""Text datasets and the sensitive-term lexicon.

Grouping for text works at two levels: rules are mined over term
*categories* (a document belongs to the "gender" group if it mentions any
gender term), while the replacement sampler operates on individual terms.
Segmentation is greedy left to right and prefers two-token lexicon entries,
so "african american" is one unit rather than "african" + "american".
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from fairminer.errors import DataError, SchemaError

_TOKEN_RE = re.compile(r"[a-z0-9]+")

# Term table for the default lexicon. Categories and the terms within them
# keep a fixed order so rule enumeration is deterministic.
DEFAULT_TERMS = {
    "gender": (
        "lesbian", "gay", "bisexual", "transgender", "trans", "queer", "lgbt",
        "lgbtq", "homosexual", "straight", "heterosexual", "male", "female",
        "nonbinary",
    ),
    "race": (
        "african", "african american", "black", "white", "european",
        "hispanic", "latino", "latina", "latinx", "mexican", "canadian",
        "american", "asian", "indian", "middle eastern", "chinese", "japanese",
    ),
    "religion": (
        "christian", "muslim", "jewish", "buddhist", "catholic", "protestant",
        "sikh", "taoist", "atheist",
    ),
    "age": (
        "old", "older", "young", "younger", "teenage", "millennial",
        "middle aged", "elderly",
    ),
}


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric token runs; punctuation splits, never joins."""
    return _TOKEN_RE.findall(text.lower())


class Lexicon:
    """Sensitive-term table: category -> ordered terms, with fast lookups."""

    def __init__(self, terms_by_category: dict[str, tuple[str, ...]]):
        if not terms_by_category:
            raise SchemaError("lexicon needs at least one category")
        self.categories: tuple[str, ...] = tuple(terms_by_category)
        self._terms: dict[str, tuple[str, ...]] = {}
        self.category_of: dict[str, str] = {}
        for cat, terms in terms_by_category.items():
            normed = []
            for term in terms:
                toks = tokenize(term)
                if not 1 <= len(toks) <= 2:
                    raise SchemaError(
                        f"lexicon term {term!r} must be one or two words")
                unit = " ".join(toks)
                if unit in self.category_of:
                    raise SchemaError(f"lexicon term {unit!r} appears twice")
                self.category_of[unit] = cat
                normed.append(unit)
            if not normed:
                raise SchemaError(f"lexicon category {cat!r} has no terms")
            self._terms[cat] = tuple(normed)
        self.bigrams = frozenset(t for t in self.category_of if " " in t)

    def terms(self, category: str) -> tuple[str, ...]:
        try:
            return self._terms[category]
        except KeyError:
            raise SchemaError(f"no lexicon category named {category!r}") from None

    def __contains__(self, term: str) -> bool:
        return term in self.category_of

    def segment(self, tokens: list[str]) -> list[str]:
        """Merge adjacent token pairs that form a lexicon bigram.

        Scans left to right; a bigram match consumes both tokens, so its
        constituents cannot also match as unigrams.
        """
        units = []
        i = 0
        n = len(tokens)
        while i < n:
            if i + 1 < n:
                pair = tokens[i] + " " + tokens[i + 1]
                if pair in self.bigrams:
                    units.append(pair)
                    i += 2
                    continue
            units.append(tokens[i])
            i += 1
        return units

    def segment_text(self, text: str) -> list[str]:
        return self.segment(tokenize(text))

    def categories_in(self, units: list[str]) -> frozenset[str]:
        return frozenset(self.category_of[u] for u in units if u in self.category_of)


def default_lexicon() -> Lexicon:
    return Lexicon(DEFAULT_TERMS)


def load_lexicon(path) -> Lexicon:
    """Read a lexicon from JSON: an object mapping category -> term list."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: lexicon file must be a JSON object")
    cleaned = {}
    for cat, terms in doc.items():
        if not isinstance(terms, list) or not all(isinstance(t, str) for t in terms):
            raise SchemaError(f"{path}: category {cat!r} must map to a list of strings")
        cleaned[str(cat)] = tuple(terms)
    return Lexicon(cleaned)


@dataclass(frozen=True)
class TextDocument:
    text: str
    units: tuple[str, ...]
    categories: frozenset[str]


class TextDataset:
    """Labeled documents pre-segmented against a lexicon."""

    def __init__(self, texts, labels, lexicon: Lexicon,
                 label_names=None, favorable_label=None):
        texts = [str(t) for t in texts]
        labels = [str(l) for l in labels]
        if len(texts) != len(labels):
            raise DataError(f"{len(texts)} documents but {len(labels)} labels")
        if not texts:
            raise DataError("text dataset is empty")
        self.lexicon = lexicon
        documents = []
        for i, text in enumerate(texts):
            units = tuple(lexicon.segment_text(text))
            if not units:
                raise DataError("document has no tokens", row=i + 1)
            documents.append(
                TextDocument(text, units, lexicon.categories_in(list(units))))
        self.documents: tuple[TextDocument, ...] = tuple(documents)
        self.labels = tuple(labels)
        if label_names is None:
            label_names = tuple(sorted(set(labels)))
        self.label_names = tuple(str(l) for l in label_names)
        for i, label in enumerate(labels):
            if label not in self.label_names:
                raise DataError(f"label {label!r} not in {list(self.label_names)}", row=i + 1)
        if favorable_label is not None and favorable_label not in self.label_names:
            raise DataError(
                f"favorable_label {favorable_label!r} not in {list(self.label_names)}")
        self.favorable_label = favorable_label

    def __len__(self) -> int:
        return len(self.documents)

    def contains_category(self, doc_index: int, category: str) -> bool:
        return category in self.documents[doc_index].categories

    def contains_term(self, doc_index: int, term: str) -> bool:
        return term in self.documents[doc_index].units


def load_text(path, lexicon: Lexicon | None = None,
              label_names=None, favorable_label=None) -> TextDataset:
    """Load a two-column TSV (label<TAB>text, no header) as a text dataset."""
    if lexicon is None:
        lexicon = default_lexicon()
    with open(path, "r", encoding="utf-8") as fh:
        content = fh.read()
    texts, labels = [], []
    for rownum, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            raise DataError("blank line", row=rownum)
        # A third tab-separated field (provenance, as written by
        # augment_text_corpus) is accepted and ignored.
        fields = line.split("\t")
        label = fields[0]
        text = fields[1] if len(fields) > 1 else ""
        if len(fields) < 2 or not label.strip():
            raise DataError("missing label (expected label<TAB>text)", row=rownum)
        if len(fields) > 3:
            raise DataError("too many columns (expected label<TAB>text)", row=rownum)
        if not text.strip():
            raise DataError("empty document", row=rownum)
        labels.append(label.strip())
        texts.append(text)
    return TextDataset(texts, labels, lexicon,
                       label_names=label_names, favorable_label=favorable_label)
