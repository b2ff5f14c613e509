"""Forum posts, author attributes and corpus-level descriptive statistics."""

from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from .exceptions import DuplicateId, EmptyCorpus, SchemaError
from .tables import Table, fmt_percent

POST_FIELDS = ("post_id", "author_id", "thread_id", "week", "text")
AUTHOR_FIELDS = ("author_id", "gender", "is_content_manager")
GENDERS = ("M", "F", "unknown")

# maximal runs of letters/digits; underscore is not a word character here
_TOKEN_RE = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class Post:
    post_id: str
    author_id: str
    thread_id: str
    week: int
    text: str


@dataclass(frozen=True)
class AuthorAttributes:
    author_id: str
    gender: str = "unknown"
    is_content_manager: bool | None = None


@dataclass(frozen=True)
class IngestPolicy:
    """Switches controlling how strict :func:`ingest_posts` is.

    allow_empty
        Accept posts whose text is the empty string.
    synthesize_authors
        Authors missing from the attribute table get a record with unknown
        gender and unknown role instead of failing the ingest.
    """

    allow_empty: bool = False
    synthesize_authors: bool = True


@dataclass(frozen=True)
class Corpus:
    posts: tuple[Post, ...]
    authors: Mapping[str, AuthorAttributes]
    actors: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "authors", MappingProxyType(dict(self.authors)))
        if not self.actors:
            object.__setattr__(self, "actors", tuple(dict.fromkeys(p.author_id for p in self.posts)))

    def __len__(self) -> int:
        return len(self.posts)

    def posts_by_author(self) -> dict[str, list[Post]]:
        out: dict[str, list[Post]] = {a: [] for a in self.actors}
        for post in self.posts:
            out[post.author_id].append(post)
        return out

    @property
    def weeks(self) -> range:
        ws = [p.week for p in self.posts]
        return range(min(ws), max(ws) + 1)


def _parse_week(value, row: int) -> int:
    if isinstance(value, bool):
        raise SchemaError(f"week must be an integer, got {value!r}", row)
    try:
        week = int(value)
    except (TypeError, ValueError):
        raise SchemaError(f"week must be an integer, got {value!r}", row) from None
    if isinstance(value, float) and value != week:
        raise SchemaError(f"week must be an integer, got {value!r}", row)
    if week < 0:
        raise SchemaError(f"week must be >= 0, got {week}", row)
    return week


def _parse_bool(value, row: int) -> bool | None:
    if isinstance(value, bool) or value is None:
        return value
    text = str(value).strip().lower()
    if text in ("true", "1", "yes"):
        return True
    if text in ("false", "0", "no"):
        return False
    if text in ("", "unknown", "na"):
        return None
    raise SchemaError(f"is_content_manager must be true/false, got {value!r}", row)


def parse_authors(rows: Iterable[Mapping]) -> dict[str, AuthorAttributes]:
    authors: dict[str, AuthorAttributes] = {}
    for i, row in enumerate(rows, start=1):
        author_id = str(row.get("author_id") or "").strip()
        if not author_id:
            raise SchemaError("missing author_id", i)
        gender = str(row.get("gender") or "unknown").strip()
        if gender not in GENDERS:
            raise SchemaError(f"gender must be one of {GENDERS}, got {gender!r}", i)
        if author_id in authors:
            raise DuplicateId(f"duplicate author_id {author_id!r} (row {i})")
        authors[author_id] = AuthorAttributes(author_id, gender, _parse_bool(row.get("is_content_manager"), i))
    return authors


def ingest_posts(
    source: Iterable[Mapping],
    authors: Iterable[Mapping] | Mapping[str, AuthorAttributes] | None = None,
    policy: IngestPolicy = IngestPolicy(),
) -> Corpus:
    """Validate raw post records and assemble a :class:`Corpus`.

    Rows keep their input order. Row numbers in errors are 1-based.
    """
    posts: list[Post] = []
    seen: set[str] = set()
    for i, row in enumerate(source, start=1):
        missing = [f for f in POST_FIELDS if f not in row or row[f] is None]
        if missing:
            raise SchemaError(f"missing field(s) {', '.join(missing)}", i)
        post_id = str(row["post_id"])
        author_id = str(row["author_id"]).strip()
        if not post_id:
            raise SchemaError("empty post_id", i)
        if not author_id:
            raise SchemaError("empty author_id", i)
        if post_id in seen:
            raise DuplicateId(f"duplicate post_id {post_id!r} (row {i})")
        text = row["text"]
        if not isinstance(text, str):
            raise SchemaError("text must be a string", i)
        if not text and not policy.allow_empty:
            raise SchemaError("empty text (set allow_empty to accept)", i)
        seen.add(post_id)
        posts.append(Post(post_id, author_id, str(row["thread_id"]), _parse_week(row["week"], i), text))
    if not posts:
        raise EmptyCorpus("no posts in input")

    if authors is None:
        registry: dict[str, AuthorAttributes] = {}
    elif isinstance(authors, Mapping):
        registry = dict(authors)
    else:
        registry = parse_authors(authors)
    for post in posts:
        if post.author_id not in registry:
            if not policy.synthesize_authors:
                raise SchemaError(f"author {post.author_id!r} has no attribute record")
            registry[post.author_id] = AuthorAttributes(post.author_id)
    return Corpus(tuple(posts), registry)


def iter_post_records(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc.msg}", lineno) from None


def iter_author_records(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "author_id" not in reader.fieldnames:
            raise SchemaError("authors table needs an author_id header")
        yield from reader


def read_corpus(posts_path, authors_path=None, policy: IngestPolicy = IngestPolicy()) -> Corpus:
    authors = iter_author_records(authors_path) if authors_path else None
    return ingest_posts(iter_post_records(posts_path), authors, policy)


def write_posts(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in corpus.posts:
            record = {"post_id": p.post_id, "author_id": p.author_id, "thread_id": p.thread_id,
                      "week": p.week, "text": p.text}
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def write_authors(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AUTHOR_FIELDS)
        for a in corpus.authors.values():
            role = "unknown" if a.is_content_manager is None else str(a.is_content_manager).lower()
            writer.writerow([a.author_id, a.gender, role])


def raw_tokens(text: str) -> list[str]:
    """Lowercased maximal alphanumeric runs; no stop-word removal, no stemming."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class CorpusStats:
    n_posts: int
    tokens: int
    types: int
    hapax: int

    @property
    def type_token_ratio(self) -> float:
        return self.types / self.tokens if self.tokens else float("nan")

    @property
    def hapax_type_ratio(self) -> float:
        return self.hapax / self.types if self.types else float("nan")

    def to_table(self) -> Table:
        table = Table(["statistic", "value"], title="Corpus statistics")
        table.add_row(["Number of posts", f"{self.n_posts:,}"])
        table.add_row(["Total number of words (Tokens)", f"{self.tokens:,}"])
        table.add_row(["Number of unique words (Types)", f"{self.types:,}"])
        table.add_row(["Type-Token Ratio", fmt_percent(self.type_token_ratio)])
        table.add_row(["Words that occur only once (Hapax)", f"{self.hapax:,}"])
        table.add_row(["Hapax-Type Ratio", fmt_percent(self.hapax_type_ratio)])
        return table


def corpus_stats(corpus: Corpus, tokenizer=raw_tokens) -> CorpusStats:
    if not corpus.posts:
        raise EmptyCorpus("no posts in corpus")
    counts: Counter[str] = Counter()
    for post in corpus.posts:
        counts.update(tokenizer(post.text))
    hapax = sum(1 for c in counts.values() if c == 1)
    return CorpusStats(len(corpus.posts), sum(counts.values()), len(counts), hapax)
