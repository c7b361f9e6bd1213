import sys
import os
import csv
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

# Add the root directory to Python path
root_dir = Path(__file__).parent.parent
sys.path.insert(0, str(root_dir))

from core.calculus import parse_vertex_function, serialize_vertex_function
from core.graph_core import parse_graph, serialize_graph
from core.models import Graph, VertexFunction
from utils.logger import get_logger

logger = get_logger("storage")


def to_jsonable(value: Any) -> Any:
    """Plain JSON data; non-finite floats become the strings "inf", "-inf" and "nan"."""
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump())
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


class StorageManager:
    """File IO for graphs, vertex functions and results. Output goes to stdout when no path is given."""

    def resolve(self, path: Optional[str]) -> Optional[Path]:
        return None if path is None or path == "-" else Path(path).expanduser().resolve()

    def read_text(self, path: str) -> str:
        resolved = self.resolve(path)
        if resolved is None:
            return sys.stdin.read()
        try:
            return resolved.read_text(encoding="utf-8")
        except OSError as e:
            logger.error("Failed to read", path=str(resolved), error=str(e))
            raise

    def write_text(self, text: str, path: Optional[str] = None) -> None:
        resolved = self.resolve(path)
        if resolved is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        try:
            os.makedirs(resolved.parent, exist_ok=True)
            resolved.write_text(text, encoding="utf-8")
            logger.debug("Wrote", path=str(resolved))
        except OSError as e:
            logger.error("Failed to write", path=str(resolved), error=str(e))
            raise

    def load_graph(self, path: str) -> Graph:
        return parse_graph(self.read_text(path))

    def save_graph(self, graph: Graph, path: Optional[str] = None) -> None:
        self.write_text(serialize_graph(graph), path)

    def load_vertex_function(self, path: str, graph: Optional[Graph] = None) -> VertexFunction:
        return parse_vertex_function(self.read_text(path), graph)

    def save_vertex_function(self, f: VertexFunction, graph: Optional[Graph] = None, path: Optional[str] = None) -> None:
        self.write_text(serialize_vertex_function(f, graph), path)

    def dumps(self, payload: Any) -> str:
        return json.dumps(to_jsonable(payload), indent=2, allow_nan=False) + "\n"

    def write_json(self, payload: Any, path: Optional[str] = None) -> None:
        self.write_text(self.dumps(payload), path)

    def write_jsonl(self, records: Iterable[Any], path: Optional[str] = None) -> None:
        lines = [json.dumps(to_jsonable(record), allow_nan=False) for record in records]
        self.write_text("".join(line + "\n" for line in lines), path)

    def write_csv(self, header: Sequence[str], rows: Iterable[Sequence[Any]], path: Optional[str] = None) -> None:
        resolved = self.resolve(path)
        table: List[List[Any]] = [[to_jsonable(cell) for cell in row] for row in rows]
        if resolved is None:
            writer = csv.writer(sys.stdout, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(table)
            sys.stdout.flush()
            return
        os.makedirs(resolved.parent, exist_ok=True)
        with open(resolved, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(table)
        logger.debug("Wrote CSV", path=str(resolved), rows=len(table))


# Global storage manager instance
storage_manager = StorageManager()
