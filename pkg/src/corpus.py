# src/corpus.py

import os
import glob
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from src.config import CORPUS_DIR, CORPUS_SUFFIX, LOG_FORMAT, LOG_LEVEL
from src.errors import PcfError
from src.evaluator import Program, Strategy
from src.models import CorpusRunRecord, OracleConfig
from src.oracle import compare_at
from src.parser import parse
from src.syntax import Term

logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)

PRAGMA_PREFIX = "--"
PRAGMA_KEYS = ("args", "points")


@dataclass
class SourceProgram:
    """A parsed program with the header pragmas of its source."""
    name: str
    text: str
    term: Term
    params: List[str]
    coarity: int
    path: Optional[str] = None
    pragmas: Dict[str, str] = field(default_factory=dict)

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def description(self) -> str:
        return self.pragmas.get("", "")

    def program(self) -> Program:
        return Program(self.term, self.params)

    def points(self) -> List[List[float]]:
        """The `-- points:` pragma: points separated by ';', coordinates by spaces."""
        raw = self.pragmas.get("points")
        if raw is None:
            return [[]] if self.arity == 0 else []
        return [[float(v) for v in chunk.split()] for chunk in raw.split(";") if chunk.strip()]


def parse_pragmas(text: str) -> Dict[str, str]:
    """
    Reads the leading comment block. `-- key: value` lines become entries; other
    comment lines are joined under the empty key as a description.
    """
    pragmas: Dict[str, str] = {}
    description: List[str] = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if not stripped.startswith(PRAGMA_PREFIX):
            break
        content = stripped[len(PRAGMA_PREFIX):].strip()
        key, sep, value = content.partition(":")
        if sep and key.strip() in PRAGMA_KEYS:
            pragmas[key.strip()] = value.strip()
        else:
            description.append(content)
    if description:
        pragmas[""] = " ".join(description)
    return pragmas


def load_source(text: str, name: str = "<inline>", path: Optional[str] = None) -> SourceProgram:
    """Parses text and checks it is a program over its declared (or free) variables."""
    pragmas = parse_pragmas(text)
    term = parse(text)
    params = pragmas["args"].split() if "args" in pragmas else None
    program = Program(term, params)
    return SourceProgram(
        name=name,
        text=text,
        term=term,
        params=list(program.params),
        coarity=program.coarity,
        path=path,
        pragmas=pragmas,
    )


def load_file(path: str) -> SourceProgram:
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    name = os.path.splitext(os.path.basename(path))[0]
    return load_source(text, name=name, path=path)


def list_corpus(corpus_dir: str = CORPUS_DIR) -> Tuple[List[SourceProgram], Dict[str, str]]:
    """Loads every corpus file; returns the programs and, per failed file, its error."""
    programs: List[SourceProgram] = []
    failures: Dict[str, str] = {}
    pattern = os.path.join(corpus_dir, f"*{CORPUS_SUFFIX}")
    for path in sorted(glob.glob(pattern)):
        try:
            programs.append(load_file(path))
        except PcfError as e:
            logging.error(f"Could not load corpus file {path}: {e}")
            failures[path] = str(e)
        except Exception as e:
            logging.error(f"Unexpected error loading corpus file {path}: {e}", exc_info=True)
            failures[path] = str(e)
    logging.info(f"Loaded {len(programs)} corpus program(s) from {corpus_dir}.")
    return programs, failures


def run_entry(source: SourceProgram, cfg: Optional[OracleConfig] = None) -> CorpusRunRecord:
    """Evaluates a corpus program at its recorded points and, for scalar programs, checks AD there."""
    cfg = cfg or OracleConfig()
    record = CorpusRunRecord(name=source.name, params=source.params, coarity=source.coarity)
    try:
        program = source.program()
        strategy = Strategy.parse(cfg.strategy)
        evaluations = []
        reports = []
        for point in source.points():
            evaluations.append({"point": point, "value": program(point, strategy, cfg.eval_config)})
            if source.coarity == 1 and source.arity > 0:
                reports.append(compare_at(program, point, cfg))
        logging.info(f"Corpus entry '{source.name}': {len(evaluations)} point(s) run.")
        return record.model_copy(update={"evaluations": evaluations, "reports": reports})
    except PcfError as e:
        logging.error(f"Corpus entry '{source.name}' failed: {e}")
        return record.model_copy(update={"error": str(e)})
