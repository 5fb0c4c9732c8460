"""
Reading and writing distribution and protocol files.

Provides:
- parse_distribution / write_distribution
- read_protocol / write_protocol
"""

import logging
from pathlib import Path
from typing import Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from lopc.core.dist import JointDist
from lopc.core.errors import ParseError
from lopc.core.protocol import ProtocolIR
from lopc.storage.models import DistributionFile, ProtocolFile

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Model = TypeVar("Model", bound=BaseModel)


def _load(path: PathLike, model: Type[Model]) -> Model:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"Cannot read {path}: {e.strerror or e}")
    try:
        return model.model_validate_json(text)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        raise ParseError(f"{path}: {where}: {first['msg']}")


def parse_distribution(path: PathLike) -> JointDist:
    """
    Load a joint distribution file.

    Args:
        path: JSON file with "parties" and "entries".

    Returns:
        JointDist: The exact distribution.

    Raises:
        ParseError: If the file is malformed.
        NormalizationError: If the probabilities do not sum to 1.
    """
    d = _load(path, DistributionFile).to_dist()
    logger.info(f"Loaded distribution {path}: {len(d.parties)} variables, {len(d.entries)} outcomes")
    return d


def write_distribution(d: JointDist, path: PathLike) -> None:
    Path(path).write_text(DistributionFile.from_dist(d).model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote distribution to {path}")


def read_protocol(path: PathLike) -> ProtocolIR:
    """
    Load a protocol file.

    Raises:
        ParseError: If the file is malformed.
        NormalizationError: If some message row does not sum to 1.
    """
    prot = _load(path, ProtocolFile).to_protocol()
    logger.info(f"Loaded protocol {path}: {len(prot.rounds)} round(s), {len(prot.outputs)} output map(s)")
    return prot


def write_protocol(prot: ProtocolIR, path: PathLike) -> None:
    Path(path).write_text(ProtocolFile.from_protocol(prot).model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"Wrote protocol to {path}")
