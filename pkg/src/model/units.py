import math
from pydantic import BaseModel, ConfigDict

TWO_PI = 2.0 * math.pi

class FrequencyValue(BaseModel):
    """A frequency quoted as X/2π in MHz; dynamics use `angular` (rad/μs)."""

    model_config = ConfigDict(frozen=True)

    cyclic: float

    @property
    def angular(self) -> float:
        return TWO_PI * self.cyclic

    @classmethod
    def from_cyclic(cls, mhz: float) -> "FrequencyValue":
        return cls(cyclic=float(mhz))

    @classmethod
    def from_angular(cls, rad_per_us: float) -> "FrequencyValue":
        return cls(cyclic=float(rad_per_us) / TWO_PI)

    def scaled(self, factor: float) -> "FrequencyValue":
        return FrequencyValue(cyclic=self.cyclic * factor)

ZERO = FrequencyValue(cyclic=0.0)
