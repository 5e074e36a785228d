"""Exception types shared across the package.

The CLI maps these onto distinct exit codes (see ``qcorr.harness.cli``), so
keep the hierarchy: configuration problems, data/file problems, and numerical
failures are separate branches.
"""


class QcorrError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(QcorrError):
    """Invalid configuration, flags, or incompatible model/data pairing."""


class MeasurementMismatchError(ConfigError):
    """A model was queried with data from a different projector subset."""


class DataFormatError(QcorrError):
    """Malformed counts files, dataset containers, or model files."""


class ChecksumError(DataFormatError):
    """Payload checksum does not match the header."""


class UnsupportedVersionError(DataFormatError):
    """File carries a format version this build cannot read."""


class NumericalError(QcorrError):
    """Numerical preconditions violated (non-Hermitian input, singular Gram...)."""


class NonHermitianError(NumericalError):
    """Matrix expected to be Hermitian is not, beyond tolerance."""


class NegativeEigenvalueError(NumericalError):
    """Matrix expected to be positive semidefinite has a significant negative eigenvalue."""


class UninformativeMeasurementError(NumericalError):
    """The Gram operator of the active projectors is singular; the subset
    spans a proper subspace and cannot be renormalized to a resolution of
    the identity."""
