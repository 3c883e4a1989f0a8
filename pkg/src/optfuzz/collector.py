"""Find optimization functions in a compiler's source tree.

Collection is deliberately shallow: functions are located by keyword
matching on their name or body, helpers are attached by matching call names
against every function defined under the same roots.  No type resolution is
attempted.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import MalformedSource, NoEnclosingFunction, UnreadableRoot
from .sut.base import SutDescriptor

log = logging.getLogger(__name__)

DEFAULT_AUX_DEPTH = 1
WINDOW_LINES = 40


class LanguageFamily(str, enum.Enum):
    BRACE = "BraceDelimited"
    INDENT = "IndentDelimited"


class OptKind(str, enum.Enum):
    CHECK_FUNCTION = "CheckFunction"
    PATTERN_MATCHER = "PatternMatcher"
    GENERIC = "Generic"


EXTENSIONS = {
    ".py": LanguageFamily.INDENT,
    ".c": LanguageFamily.BRACE,
    ".cc": LanguageFamily.BRACE,
    ".cpp": LanguageFamily.BRACE,
    ".cxx": LanguageFamily.BRACE,
    ".h": LanguageFamily.BRACE,
    ".hh": LanguageFamily.BRACE,
    ".hpp": LanguageFamily.BRACE,
    ".inc": LanguageFamily.BRACE,
    ".java": LanguageFamily.BRACE,
    ".js": LanguageFamily.BRACE,
    ".ts": LanguageFamily.BRACE,
    ".rs": LanguageFamily.BRACE,
    ".go": LanguageFamily.BRACE,
    ".td": LanguageFamily.BRACE,
}

CONTROL_WORDS = {
    "if", "for", "while", "switch", "catch", "return", "sizeof", "else", "do", "try",
    "defined", "decltype", "alignof", "typeof", "new", "delete", "throw", "case",
}


@dataclass(frozen=True)
class Optimization:
    id: str
    name: str
    kind: OptKind
    main_source: str
    aux_sources: tuple[tuple[str, str], ...]
    file_path: str
    line_span: tuple[int, int]
    total_lines: int

    def full_source(self) -> str:
        """Main source followed by the auxiliary functions."""
        parts = [self.main_source.rstrip("\n")]
        for _, src in self.aux_sources:
            parts.append(src.rstrip("\n"))
        return "\n\n".join(parts) + "\n"

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "kind": self.kind.value,
            "main_source": self.main_source,
            "aux_sources": [list(a) for a in self.aux_sources],
            "file_path": self.file_path,
            "line_span": list(self.line_span),
            "total_lines": self.total_lines,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Optimization":
        return cls(
            id=d["id"],
            name=d["name"],
            kind=OptKind(d["kind"]),
            main_source=d["main_source"],
            aux_sources=tuple((a[0], a[1]) for a in d["aux_sources"]),
            file_path=d["file_path"],
            line_span=(d["line_span"][0], d["line_span"][1]),
            total_lines=d["total_lines"],
        )


@dataclass(frozen=True)
class FunctionSpan:
    name: str
    body: str
    line_span: tuple[int, int]  # 1-based, inclusive
    start: int  # character offsets into the file
    end: int
    file_path: str = ""


def count_lines(text: str) -> int:
    return len(text.splitlines())


def _line_starts(source: str) -> list[int]:
    starts = [0]
    for m in re.finditer("\n", source):
        starts.append(m.end())
    return starts


def _line_of(starts: list[int], offset: int) -> int:
    lo, hi = 0, len(starts) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if starts[mid] <= offset:
            lo = mid
        else:
            hi = mid - 1
    return lo + 1


# ---------------------------------------------------------------------------
# indentation-delimited sources
# ---------------------------------------------------------------------------

_DEF_RE = re.compile(r"^([ \t]*)(?:async[ \t]+)?def[ \t]+(\w+)[ \t]*\(")
_TRIPLE_RE = re.compile(r'"""|\'\'\'')


def _indent_width(prefix: str) -> int:
    return len(prefix.expandtabs(8))


def _string_lines(lines: list[str]) -> set[int]:
    """Indices of lines that begin inside a triple-quoted string."""
    inside: str | None = None
    result = set()
    for i, line in enumerate(lines):
        if inside is not None:
            result.add(i)
        for m in _TRIPLE_RE.finditer(line):
            if inside is None:
                inside = m.group()
            elif m.group() == inside:
                inside = None
    return result


def _indent_functions(source: str) -> list[FunctionSpan]:
    lines = source.splitlines(keepends=True)
    starts = _line_starts(source)
    in_string = _string_lines(lines)
    spans = []
    for i, line in enumerate(lines):
        if i in in_string:
            continue
        m = _DEF_RE.match(line)
        if not m:
            continue
        depth = _indent_width(m.group(1))
        # signature may span several lines: wait for parentheses to balance
        j, parens = i, 0
        while j < len(lines):
            code = lines[j].split("#", 1)[0]
            parens += code.count("(") + code.count("[") - code.count(")") - code.count("]")
            if parens <= 0 and code.rstrip().endswith(":"):
                break
            j += 1
        last = min(j, len(lines) - 1)
        k = j + 1
        while k < len(lines):
            text = lines[k]
            stripped = text.strip()
            if k in in_string or not stripped or stripped.startswith("#"):
                k += 1
                continue
            if _indent_width(text[: len(text) - len(text.lstrip())]) <= depth:
                break
            last = k
            k += 1
        start = starts[i]
        end = starts[last] + len(lines[last].rstrip("\n"))
        spans.append(FunctionSpan(m.group(2), source[start:end] + "\n", (i + 1, last + 1), start, end))
    return spans


# ---------------------------------------------------------------------------
# brace-delimited sources
# ---------------------------------------------------------------------------

_MASK_RE = re.compile(
    r"""//[^\n]*|/\*.*?\*/|"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*'""",
    re.DOTALL,
)
_CALLISH_RE = re.compile(r"([A-Za-z_~][\w]*(?:::[A-Za-z_~]\w*)*)\s*\(")


def _mask(source: str) -> str:
    """Blank out comments and literals, keeping offsets and newlines."""
    return _MASK_RE.sub(lambda m: re.sub(r"[^\n]", " ", m.group()), source)


def _match_paren(text: str, open_at: int) -> int | None:
    depth = 0
    for k in range(open_at, len(text)):
        if text[k] == "(":
            depth += 1
        elif text[k] == ")":
            depth -= 1
            if depth == 0:
                return k
    return None


def _function_name(header: str) -> tuple[str, int] | None:
    """Name and offset of the function declared by ``header`` (text before ``{``)."""
    for m in _CALLISH_RE.finditer(header):
        full = m.group(1)
        short = full.split("::")[-1]
        if short in CONTROL_WORDS:
            return None
        before = header[: m.start()].rstrip()
        if before.endswith((".", "->", "=", "(", ",", "return")):
            return None
        close = _match_paren(header, m.end() - 1)
        if close is None:
            return None
        rest = header[close + 1 :]
        if "=" in rest.replace("==", "").replace("->", "").replace(">=", "").replace("<=", ""):
            return None
        return short, m.start()
    return None


def _brace_functions(source: str) -> list[FunctionSpan]:
    masked = _mask(source)
    starts = _line_starts(source)
    pairs = []
    stack = []
    for k, ch in enumerate(masked):
        if ch == "{":
            stack.append(k)
        elif ch == "}" and stack:
            pairs.append((stack.pop(), k))
    spans = []
    for open_at, close_at in sorted(pairs):
        header_start = max(masked.rfind(c, 0, open_at) for c in ";{}") + 1
        header = masked[header_start:open_at]
        found = _function_name(header)
        if found is None:
            continue
        name, rel = found
        start_line = _line_of(starts, header_start + rel)
        start = starts[start_line - 1]
        end = close_at + 1
        spans.append(
            FunctionSpan(name, source[start:end] + "\n", (start_line, _line_of(starts, close_at)), start, end)
        )
    return spans


def list_functions(source: str, language_family: LanguageFamily) -> list[FunctionSpan]:
    family = LanguageFamily(language_family)
    if family is LanguageFamily.INDENT:
        return _indent_functions(source)
    return _brace_functions(source)


def extract_function(source: str, language_family: LanguageFamily, match_offset: int) -> tuple[str, str, tuple[int, int]]:
    """Smallest function enclosing ``match_offset``: ``(name, body, line_span)``."""
    if not 0 <= match_offset <= len(source):
        raise ValueError("match_offset outside source")
    enclosing = [f for f in list_functions(source, language_family) if f.start <= match_offset < f.end]
    if not enclosing:
        raise NoEnclosingFunction(match_offset, _line_of(_line_starts(source), match_offset))
    inner = max(enclosing, key=lambda f: f.start)
    return inner.name, inner.body, inner.line_span


def file_window(source: str, match_offset: int, window: int = WINDOW_LINES) -> tuple[str, tuple[int, int]]:
    """Fallback for matches outside any function: ``window`` lines around the match."""
    lines = source.splitlines(keepends=True)
    line = _line_of(_line_starts(source), match_offset)
    first = max(1, line - window // 2)
    last = min(len(lines), first + window - 1)
    return "".join(lines[first - 1 : last]), (first, last)


# ---------------------------------------------------------------------------
# classification and auxiliaries
# ---------------------------------------------------------------------------

_PATTERN_HINT = re.compile(
    r"^[ \t]*match[ \t]+[^\n]*:[ \t]*$|\bpattern|matchAndRewrite|register_replacement|PatternRewriter",
    re.MULTILINE | re.IGNORECASE,
)
_CHECK_NAME = re.compile(r"^(can|should|check|is|has)(_|[A-Z])")


def classify_kind(name: str, body: str) -> OptKind:
    if _PATTERN_HINT.search(body):
        return OptKind.PATTERN_MATCHER
    if _CHECK_NAME.match(name):
        return OptKind.CHECK_FUNCTION
    return OptKind.GENERIC


_CALL_RE = re.compile(r"\b([A-Za-z_]\w*)\s*\(")


def called_names(source: str) -> list[str]:
    seen = []
    for m in _CALL_RE.finditer(source):
        if m.group(1) not in seen:
            seen.append(m.group(1))
    return seen


def _corpus_map(corpus) -> dict[str, str]:
    if isinstance(corpus, Mapping):
        return dict(corpus)
    out: dict[str, str] = {}
    for fn in corpus:
        out.setdefault(fn.name, fn.body)
    return out


def attach_auxiliaries(opt: Optimization, corpus, depth: int = DEFAULT_AUX_DEPTH) -> Optimization:
    """Attach helpers reachable from ``opt`` by call-name matching, up to ``depth`` hops."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    defined = _corpus_map(corpus)
    seen = {opt.name}
    aux: list[tuple[str, str]] = []
    frontier = [opt.main_source]
    for _ in range(depth):
        nxt = []
        for src in frontier:
            for name in called_names(src):
                if name in seen or name not in defined:
                    continue
                seen.add(name)
                aux.append((name, defined[name]))
                nxt.append(defined[name])
        frontier = nxt
    total = count_lines(opt.main_source) + sum(count_lines(s) for _, s in aux)
    return replace(opt, aux_sources=tuple(aux), total_lines=total)


# ---------------------------------------------------------------------------
# collection
# ---------------------------------------------------------------------------


def _keyword_matcher(descriptor: SutDescriptor):
    if descriptor.keyword_regex:
        patterns = [re.compile(k, re.IGNORECASE) for k in descriptor.opt_keywords]
        return lambda text: any(p.search(text) for p in patterns)
    keys = [k.lower() for k in descriptor.opt_keywords]
    return lambda text: any(k in text.lower() for k in keys)


def stable_id(file_path: str, name: str) -> str:
    return hashlib.sha256(f"{file_path}::{name}".encode()).hexdigest()[:16]


@dataclass
class CollectResult:
    optimizations: list[Optimization]
    warnings: list[str] = field(default_factory=list)


def _source_files(root: Path) -> Iterable[Path]:
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if not d.startswith(".") and d != "__pycache__")
        for fn in sorted(filenames):
            path = Path(dirpath) / fn
            if path.suffix in EXTENSIONS:
                yield path


def collect_detailed(
    descriptor: SutDescriptor, aux_depth: int = DEFAULT_AUX_DEPTH, include_toplevel: bool = False
) -> CollectResult:
    matches = _keyword_matcher(descriptor)
    warnings: list[str] = []
    multi = len(descriptor.source_roots) > 1
    functions: list[FunctionSpan] = []
    toplevel: list[FunctionSpan] = []

    for root_str in descriptor.source_roots:
        root = Path(root_str)
        if not root.is_dir() or not os.access(root, os.R_OK | os.X_OK):
            raise UnreadableRoot(f"source root {root} does not exist or is not readable")
        for path in _source_files(root):
            rel = path.relative_to(root).as_posix()
            if multi:
                rel = f"{root.name}/{rel}"
            try:
                try:
                    source = path.read_text(encoding="utf-8")
                except (UnicodeDecodeError, OSError) as exc:
                    raise MalformedSource(f"{path}: {exc}") from exc
                found = list_functions(source, EXTENSIONS[path.suffix])
            except MalformedSource as exc:
                warnings.append(str(exc))
                log.warning("skipping %s", exc)
                continue
            functions.extend(replace(f, file_path=rel) for f in found)
            if include_toplevel:
                toplevel.extend(_toplevel_matches(source, found, rel, matches))

    corpus = _corpus_map(functions)
    opts: list[Optimization] = []
    names: set[str] = set()
    for fn in sorted(functions + toplevel, key=lambda f: (f.file_path, f.line_span[0])):
        if not (matches(fn.name) or matches(fn.body)):
            continue
        if fn.name in names:
            warnings.append(f"duplicate optimization name {fn.name!r} in {fn.file_path}; keeping the first")
            continue
        names.add(fn.name)
        opt = Optimization(
            id=stable_id(fn.file_path, fn.name),
            name=fn.name,
            kind=classify_kind(fn.name, fn.body),
            main_source=fn.body,
            aux_sources=(),
            file_path=fn.file_path,
            line_span=fn.line_span,
            total_lines=count_lines(fn.body),
        )
        opt = attach_auxiliaries(opt, corpus, aux_depth)
        if descriptor.max_source_lines is not None and opt.total_lines > descriptor.max_source_lines:
            continue
        opts.append(opt)
    return CollectResult(opts, warnings)


def _toplevel_matches(source, functions, rel, matches) -> list[FunctionSpan]:
    starts = _line_starts(source)
    out = []
    for lineno, line in enumerate(source.splitlines(), start=1):
        offset = starts[lineno - 1]
        if any(f.start <= offset < f.end for f in functions) or not matches(line):
            continue
        body, span = file_window(source, offset)
        if any(o.line_span == span for o in out):
            continue
        out.append(FunctionSpan(f"{Path(rel).stem}_L{lineno}", body, span, offset, offset, rel))
    return out


def collect(descriptor: SutDescriptor, aux_depth: int = DEFAULT_AUX_DEPTH, include_toplevel: bool = False) -> list[Optimization]:
    """Every function under the descriptor's roots whose name or body matches a keyword.

    Ordered by ``(file_path, start line)``; entries longer than
    ``max_source_lines`` (main plus auxiliaries) are dropped.
    """
    return collect_detailed(descriptor, aux_depth, include_toplevel).optimizations


def write_catalog(opts: Iterable[Optimization], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for opt in opts:
            f.write(json.dumps(opt.to_dict(), sort_keys=True) + "\n")


def read_catalog(path) -> list[Optimization]:
    with open(path, encoding="utf-8") as f:
        return [Optimization.from_dict(json.loads(line)) for line in f if line.strip()]
