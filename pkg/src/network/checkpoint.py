"""Portable JSON checkpoints of a trained network and its ADOS regressor."""

import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..assessment.svr import SvrModel
from ..config import NetworkConfig, SvrConfig
from ..errors import DatasetFormatError
from ..logger import get_logger
from ..topology import topology_by_name
from .layers import GcnLayer, TcnLayer
from .model import GaitNet

logger = get_logger("network.checkpoint")

CHECKPOINT_FORMAT = "gaitscope-checkpoint"
CHECKPOINT_VERSION = 1


def _encode(name: str, array: np.ndarray) -> Dict[str, Any]:
    return {"name": name, "shape": list(array.shape), "values": array.ravel().tolist()}


def _decode(entry: Dict[str, Any]) -> np.ndarray:
    values = np.array(entry["values"], dtype=np.float64)
    return values.reshape(entry["shape"])


def save_checkpoint(
    path: Path,
    net: GaitNet,
    svr: Optional[SvrModel] = None,
    svr_config: Optional[SvrConfig] = None,
) -> None:
    """Write the config echo, named flat parameters and the optional regressor."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "topology": net.topology_name,
        "in_channels": net.in_channels,
        "trained": net.trained,
        "network_config": net.config.model_dump(),
        "parameters": [_encode(name, p) for name, p in net.parameters().items()],
        "svr_config": svr_config.model_dump() if svr_config is not None else None,
        "svr": svr.to_dict() if svr is not None else None,
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
    logger.info(
        f"Saved checkpoint to {path}",
        extra={"path": str(path), "parameters": net.num_parameters(), "svr": svr is not None},
    )


def load_checkpoint(
    path: Path,
) -> Tuple[GaitNet, Optional[SvrModel], Optional[SvrConfig]]:
    """Rebuild the network (and regressor) stored by ``save_checkpoint``."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DatasetFormatError(f"invalid checkpoint JSON: {e.msg}", f"{path}:{e.lineno}") from None

    if payload.get("format") != CHECKPOINT_FORMAT:
        raise DatasetFormatError("not a gaitscope checkpoint", str(path))
    if payload.get("version") != CHECKPOINT_VERSION:
        raise DatasetFormatError(
            f"unsupported checkpoint version {payload.get('version')!r}", str(path)
        )

    try:
        config = NetworkConfig(**payload["network_config"])
        net = GaitNet.initialize(
            config, topology_by_name(payload["topology"]), payload["in_channels"]
        )
        stored = {entry["name"]: _decode(entry) for entry in payload["parameters"]}
    except (KeyError, TypeError, ValueError) as e:
        raise DatasetFormatError(f"malformed checkpoint: {e}", str(path)) from None

    params = net.parameters()
    if set(stored) != set(params):
        raise DatasetFormatError(
            f"checkpoint parameters {sorted(stored)} do not match the network", str(path)
        )
    for i in range(len(net.gcn)):
        net.gcn[i] = GcnLayer(stored[f"gcn{i}.weights"], stored[f"gcn{i}.bias"])
        net.tcn[i] = TcnLayer(stored[f"tcn{i}.kernel"])
    net.head_weights = stored["head.weights"]
    net.head_bias = stored["head.bias"]
    for name, array in net.parameters().items():
        if array.shape != params[name].shape:
            raise DatasetFormatError(
                f"parameter {name} has shape {array.shape}, expected {params[name].shape}",
                str(path),
            )
    net.trained = bool(payload.get("trained", False))

    svr = SvrModel.from_dict(payload["svr"]) if payload.get("svr") else None
    svr_config = SvrConfig(**payload["svr_config"]) if payload.get("svr_config") else None
    return net, svr, svr_config
