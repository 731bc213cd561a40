"""
Output Storage - Writes reports, verdict streams and tables under one directory
"""

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from src.monitoring.logger import StructuredLogger


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


class OutputStore:
    """Manages experiment outputs in a local directory"""

    def __init__(self, base_dir: Union[str, Path]):
        """
        Initialize the store

        Args:
            base_dir: Output directory (created on first write)
        """
        self.base_dir = Path(base_dir)
        self.logger = StructuredLogger(name="infrastructure.storage")

    def path_for(self, filename: str) -> Path:
        self.base_dir.mkdir(parents=True, exist_ok=True)
        return self.base_dir / filename

    def write_json(self, filename: str, data: Dict[str, Any]) -> Path:
        path = self.path_for(filename)
        with open(path, 'w') as f:
            json.dump(data, f, indent=2, sort_keys=True, default=_json_default)
            f.write('\n')
        self.logger.info("Wrote JSON output", path=str(path))
        return path

    def read_json(self, path: Union[str, Path]) -> Dict[str, Any]:
        with open(path, 'r') as f:
            return json.load(f)

    def write_jsonl(self, filename: str, records: Iterable[Dict[str, Any]]) -> Path:
        """One JSON object per line, in the order given"""
        path = self.path_for(filename)
        count = 0
        with open(path, 'w') as f:
            for record in records:
                f.write(json.dumps(record, sort_keys=True, default=_json_default))
                f.write('\n')
                count += 1
        self.logger.info("Wrote JSONL output", path=str(path), records=count)
        return path

    def read_jsonl(self, filename: str) -> List[Dict[str, Any]]:
        with open(self.base_dir / filename, 'r') as f:
            return [json.loads(line) for line in f if line.strip()]

    def write_csv(
        self,
        filename: str,
        header: Sequence[str],
        rows: Iterable[Sequence[Any]],
        metadata: Optional[Dict[str, Any]] = None
    ) -> Path:
        """CSV with optional `# key: value` metadata lines before the header"""
        path = self.path_for(filename)
        with open(path, 'w', newline='') as f:
            for key in sorted(metadata or {}):
                f.write(f"# {key}: {metadata[key]}\n")
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            writer.writerows(rows)
        self.logger.info("Wrote CSV output", path=str(path))
        return path

    def list_files(self, pattern: str) -> List[Path]:
        if not self.base_dir.exists():
            return []
        return sorted(self.base_dir.glob(pattern))
