import math
import numpy as np
import scipy.stats

from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import NamedTuple, Optional


class MeasurementProtocolConfig(BaseModel):
    """Repeated-measurement protocol with a confidence interval stopping rule"""

    model_config = ConfigDict(frozen=True, extra='forbid')

    confidence_level: float = Field(default=0.95, gt=0.0, lt=1.0)
    max_relative_halfwidth: float = Field(default=0.02, gt=0.0)
    min_runs: int = Field(default=5, ge=2)
    max_runs: int = Field(default=50, ge=2)

    @model_validator(mode='after')
    def _check_runs(self) -> 'MeasurementProtocolConfig':
        if self.max_runs < self.min_runs:
            raise ValueError(f'max_runs ({self.max_runs}) must be at least min_runs ({self.min_runs})')
        return self


class MeasurementResult(NamedTuple):
    measured_energy: float
    runs_used: int
    converged: bool
    halfwidth: float


class SimulatedDevice(object):
    """Device under test with a power meter on its supply.

    Each run measures the total energy while decoding and, separately, the idle
    energy over the same duration. Both readings carry multiplicative Gaussian
    noise (relative std sigma) and an additive Gaussian floor (noise_floor watts
    over the run duration).
    """

    def __init__(self, idle_power: float = 0.5,
                 decode_power: float = 2.0,
                 sigma: float = 0.0,
                 noise_floor: float = 0.0,
                 seed: int = 0):
        """Create a simulated device.

        :param idle_power: Idle power in watts
        :param decode_power: Additional power while decoding in watts (sets the run duration)
        :param sigma: Relative standard deviation of a meter reading
        :param noise_floor: Additive noise standard deviation in watts
        :param seed: Seed of the noise stream

        :raises ValueError: for nonpositive powers or negative noise
        """

        if not idle_power > 0:
            raise ValueError(f'idle_power must be positive; got {idle_power}')
        if not decode_power > 0:
            raise ValueError(f'decode_power must be positive; got {decode_power}')
        if sigma < 0 or noise_floor < 0:
            raise ValueError('Noise parameters must be nonnegative')

        self.__idle_power = idle_power
        self.__decode_power = decode_power
        self.__sigma = sigma
        self.__noise_floor = noise_floor
        self.__seed = seed
        self.__rng = np.random.default_rng(seed)

    @property
    def idle_power(self) -> float:
        return self.__idle_power

    @property
    def decode_power(self) -> float:
        return self.__decode_power

    @property
    def sigma(self) -> float:
        return self.__sigma

    @property
    def noise_floor(self) -> float:
        return self.__noise_floor

    @property
    def seed(self) -> int:
        return self.__seed

    def run(self, true_energy: float) -> float:
        """One idle-subtracted measurement of a decoding run.

        :param true_energy: Energy the decoding process actually needs (joules)

        :returns: Measured total energy minus measured idle energy
        """

        duration = true_energy / self.__decode_power
        idle = self.__idle_power * duration
        total = idle + true_energy

        zz = self.__rng.standard_normal(4)
        total_noise = self.__sigma * total * zz[0] + self.__noise_floor * duration * zz[1]
        idle_noise = self.__sigma * idle * zz[2] + self.__noise_floor * duration * zz[3]

        # (total + total_noise) - (idle + idle_noise)
        return true_energy + (total_noise - idle_noise)


def simulate_measurement(device: SimulatedDevice,
                         true_energy: float,
                         protocol: Optional[MeasurementProtocolConfig] = None) -> MeasurementResult:
    """Measure a bit stream repeatedly until the confidence interval is narrow enough.

    The run stops once at least min_runs runs were made and the Student-t
    half-width is at most max_relative_halfwidth times the mean, or after max_runs.

    :param device: Simulated device
    :param true_energy: Energy the decoding process actually needs (joules)
    :param protocol: Protocol settings (defaults apply if None)

    :returns: MeasurementResult with the mean of the runs as the measured energy

    :raises ValueError: if true_energy is not positive
    """

    if not true_energy > 0:
        raise ValueError(f'true_energy must be positive; got {true_energy}')
    if protocol is None:
        protocol = MeasurementProtocolConfig()

    samples = []
    mean = 0.0
    halfwidth = math.inf

    while True:
        samples.append(device.run(true_energy))
        nruns = len(samples)

        # Shifted mean is exact when all samples are equal
        x0 = samples[0]
        mean = x0 + math.fsum(xx - x0 for xx in samples) / nruns

        if nruns >= 2:
            sdev = float(np.std(samples, ddof=1))
            halfwidth = sdev / math.sqrt(nruns) * float(scipy.stats.t.ppf((1.0 + protocol.confidence_level) / 2.0,
                                                                          nruns - 1))

            if nruns >= protocol.min_runs and halfwidth <= protocol.max_relative_halfwidth * abs(mean):
                return MeasurementResult(measured_energy=mean, runs_used=nruns, converged=True, halfwidth=halfwidth)

        if nruns >= protocol.max_runs:
            return MeasurementResult(measured_energy=mean, runs_used=nruns, converged=False, halfwidth=halfwidth)
