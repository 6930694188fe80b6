"""Run manifests: everything needed to repeat a command and check its inputs."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

from .. import __version__
from .._algae.exceptions import StructuralError
from .._algae.utils import raiseif

CHUNK = 1 << 20


def file_digest(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()

    with Path(path).open('rb') as f:
        for block in iter(lambda: f.read(CHUNK), b''):
            digest.update(block)

    return digest.hexdigest()


@dataclass
class RunManifest:
    """Attributes:
        - `command` : `str`
        - `config` : `dict`, the fully resolved configuration
        - `seed` : `int`, `None` for commands without randomness
        - `version` : `str`
        - `inputs` : `Dict[str, str]`, sha256 of every input file by path
        - `outputs` : `List[str]`
        - `wall_clock` : `float`, seconds
        - `timings` : `Dict[str, float]`, training seconds per method
    """
    command: str
    config: dict
    seed: Optional[int] = None
    version: str = __version__
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)
    wall_clock: float = 0.0
    timings: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def of(cls, command: str, config: dict, seed: Optional[int], inputs=()) -> RunManifest:
        return cls(command, config, seed, inputs={str(path): file_digest(path) for path in inputs})

    def verify_inputs(self):
        """Raises:
            - `StructuralError` : an input is missing or its contents changed since the run.
        """
        for path, expected in self.inputs.items():
            raiseif(
                not Path(path).is_file(),
                StructuralError(f':[{path}]: Input of the recorded run is missing.')
            )
            raiseif(
                file_digest(path) != expected,
                StructuralError(f':[{path}]: Input changed since the recorded run (sha256 mismatch).')
            )

    def to_dict(self) -> dict:
        return asdict(self)

    def save(self, path: Union[str, Path]):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(json.dumps(self.to_dict(), indent=2), encoding='utf-8')

    @classmethod
    def load(cls, path: Union[str, Path]) -> RunManifest:
        try:
            value = json.loads(Path(path).read_text(encoding='utf-8'))
            return cls(**value)
        except (OSError, ValueError, TypeError) as error:
            raise StructuralError(f':[{path}]: Not a run manifest; {error}') from error
