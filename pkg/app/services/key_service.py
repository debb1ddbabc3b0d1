"""
Key files: the only thing ever stored. A watermark is regenerated from its key
on demand.

x0 and a are written as decimal strings with 17 significant digits, which
round-trips every binary64 value exactly.
"""
import json
import os
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_serializer, field_validator

from app.config import KEY_SCHEMA_VERSION, MAX_ORDER, MIN_ORDER
from app.services.chaotic_keystream import A_RANGE, D_RANGE, K_RANGE, X0_RANGE, ChaosParams
from app.services.fractal_curves import CurveKind, VariationParams
from app.services.watermark import WatermarkKey
from app.utils import hash_utils
from app.utils.exceptions import FileAccessError, ParameterError
from app.utils.logger import get_logger

logger = get_logger(__name__)


class KeyFile(BaseModel):
    model_config = ConfigDict(frozen=True)

    schema_version: int = KEY_SCHEMA_VERSION
    kind: CurveKind
    n: int = Field(ge=MIN_ORDER, le=MAX_ORDER)
    r: int
    m: int
    o: int
    x0: float
    a: float
    k: int
    d: int

    @field_validator("schema_version")
    @classmethod
    def _check_version(cls, v):
        if v != KEY_SCHEMA_VERSION:
            raise ValueError(f"unsupported key schema version {v}")
        return v

    @field_serializer("x0", "a")
    def _exact_decimal(self, v: float) -> str:
        return format(v, ".17g")

    @classmethod
    def from_key(cls, key: WatermarkKey) -> "KeyFile":
        return cls(
            kind=key.kind,
            n=key.n,
            r=key.variation.r,
            m=key.variation.m,
            o=key.variation.o,
            x0=key.chaos.x0,
            a=key.chaos.a,
            k=key.chaos.k,
            d=key.chaos.d,
        )

    def to_key(self) -> WatermarkKey:
        return WatermarkKey(
            kind=self.kind,
            n=self.n,
            variation=VariationParams(r=self.r, m=self.m, o=self.o),
            chaos=ChaosParams(x0=self.x0, a=self.a, k=self.k, d=self.d),
        )

    def canonical(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


def make_key(
    kind: CurveKind = CurveKind.HILBERT,
    n: int = 3,
    r: int = 0,
    m: int = 0,
    o: int = 0,
    x0: float = 0.31,
    a: float = 3.91,
    k: int = 250,
    d: int = 7,
) -> WatermarkKey:
    try:
        return WatermarkKey(
            kind=kind,
            n=n,
            variation=VariationParams(r=r, m=m, o=o),
            chaos=ChaosParams(x0=x0, a=a, k=k, d=d),
        )
    except ValidationError as e:
        raise ParameterError(f"invalid key parameters: {e}") from e


def random_key(seed: int, kind: CurveKind = CurveKind.HILBERT, n: int = 3) -> WatermarkKey:
    """Uniform draw within the published parameter ranges."""
    kind = CurveKind(kind)
    rng = np.random.default_rng(seed)
    while True:
        candidate = dict(
            r=int(rng.integers(0, 4)),
            m=int(rng.integers(0, 9)),
            o=int(rng.integers(0, 4)) if kind is CurveKind.HILBERT else 0,
            x0=float(rng.uniform(*X0_RANGE)),
            a=float(rng.uniform(*A_RANGE)),
            k=int(rng.integers(K_RANGE[0], K_RANGE[1] + 1)),
            d=int(rng.integers(D_RANGE[0], D_RANGE[1] + 1)),
        )
        try:
            return make_key(kind=kind, n=n, **candidate)
        except ParameterError:
            # measure-zero fixed point hit; draw again
            logger.warning(f"Discarded sampled key {candidate}")


def fingerprint(key: WatermarkKey) -> str:
    return hash_utils.text_digest(KeyFile.from_key(key).canonical())


def dumps(key: WatermarkKey) -> str:
    return json.dumps(KeyFile.from_key(key).model_dump(mode="json"), indent=2) + "\n"


def loads(text: str) -> WatermarkKey:
    try:
        return KeyFile.model_validate_json(text).to_key()
    except ValidationError as e:
        raise ParameterError(f"invalid key file: {e}") from e


def save_key(key: WatermarkKey, path: str) -> None:
    try:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(dumps(key))
    except OSError as e:
        raise FileAccessError(f"cannot write key file {path}: {e}") from e
    logger.info(f"Wrote key file {path}")


def load_key(path: Optional[str]) -> WatermarkKey:
    if not path:
        raise ParameterError("no key file given (use --key or set FRACTAL_WM_KEY)")
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise FileAccessError(f"cannot read key file {path}: {e}") from e
    return loads(text)
