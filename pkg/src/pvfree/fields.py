"""Four-potentials on periodic grids and their unitary Fourier spectra.

Grid arrays have shape (n1, n2, n3) indexed [ix, iy, iz].  Grid coordinates
are x_i = (i - n//2) * dx, so the box spans [-L/2, L/2) and the transform
phase is referred to the box centre.
"""

import base64
import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (DomainError, GaugeError, InvalidDataError,
                     MalformedPayloadError, UnsupportedVersionError)

FORMAT_VERSION = 1


def _triple(value, kind, name):
    t = tuple(kind(v) for v in np.broadcast_to(np.asarray(value), (3,)))
    if any(not v > 0 for v in t):
        raise DomainError(f"{name} entries must be positive")
    return t


@dataclass(frozen=True, eq=False)
class GridField:
    """Scalar potential ``v`` and vector potential ``a`` (3 arrays) on a grid."""

    n: tuple
    box_length: tuple
    v: np.ndarray
    a: tuple

    def __post_init__(self):
        object.__setattr__(self, "n", _triple(self.n, int, "n"))
        object.__setattr__(self, "box_length", _triple(self.box_length, float, "box_length"))
        v = np.array(self.v, dtype=float).reshape(self.n)
        a = tuple(np.array(ai, dtype=float).reshape(self.n) for ai in self.a)
        if len(a) != 3:
            raise DomainError("vector potential needs three components")
        for arr in (v,) + a:
            if not np.all(np.isfinite(arr)):
                raise InvalidDataError("field values must be finite")
            arr.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "a", a)

    @property
    def spacing(self):
        return tuple(L / n for L, n in zip(self.box_length, self.n))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def coordinates(self):
        """Centred coordinate axes x, y, z."""
        return tuple((np.arange(n) - n // 2) * d for n, d in zip(self.n, self.spacing))

    def scaled(self, alpha):
        return GridField(self.n, self.box_length, alpha * self.v, tuple(alpha * ai for ai in self.a))


def _encode(arr):
    return base64.b64encode(np.asarray(arr, dtype="<f8").ravel(order="F").tobytes()).decode("ascii")


def _decode(text, n):
    try:
        raw = base64.b64decode(text, validate=True)
    except (ValueError, TypeError) as exc:
        raise MalformedPayloadError(f"invalid base64 payload: {exc}") from None
    expected = 8 * n[0] * n[1] * n[2]
    if len(raw) != expected:
        raise MalformedPayloadError(f"payload has {len(raw)} bytes, expected {expected}")
    arr = np.frombuffer(raw, dtype="<f8").reshape(n, order="F").astype(float)
    if not np.all(np.isfinite(arr)):
        raise InvalidDataError("payload contains non-finite values")
    return arr


def dump_grid_field(field):
    """Serialise to the version-1 JSON field document (UTF-8 bytes)."""
    doc = {
        "version": FORMAT_VERSION,
        "grid": {"n": list(field.n), "box_length": [float(x) for x in field.box_length]},
        "units": "natural",
        "v": _encode(field.v),
        "a": [_encode(ai) for ai in field.a],
    }
    return (json.dumps(doc, indent=1) + "\n").encode("utf-8")


def load_grid_field(document):
    """Decode a field document produced by ``dump_grid_field``."""
    if isinstance(document, (bytes, bytearray)):
        document = document.decode("utf-8")
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise MalformedPayloadError(f"not a JSON document: {exc}") from None
    if not isinstance(doc, dict):
        raise MalformedPayloadError("field document must be a JSON object")
    if doc.get("version") != FORMAT_VERSION:
        raise UnsupportedVersionError(f"unsupported field format version {doc.get('version')!r}")
    try:
        n = tuple(int(x) for x in doc["grid"]["n"])
        box = tuple(float(x) for x in doc["grid"]["box_length"])
        v_text = doc["v"]
        a_text = doc["a"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedPayloadError(f"missing or malformed field entry: {exc}") from None
    if len(n) != 3 or len(box) != 3 or len(a_text) != 3 or min(n) < 1:
        raise MalformedPayloadError("grid must be three-dimensional with three A components")
    v = _decode(v_text, n)
    a = tuple(_decode(t, n) for t in a_text)
    return GridField(n, box, v, a)


def gaussian_test_field(amplitude, width, n, box_length):
    """V = amplitude * exp(-|x|^2 / (2 width^2)) centred in the box, A = 0."""
    if not width > 0:
        raise DomainError("width must be positive")
    n = _triple(n, int, "n")
    box = _triple(box_length, float, "box_length")
    if min(box) < 10 * width:
        warnings.warn("box shorter than 10 widths; periodic images will overlap", stacklevel=2)
    proto = GridField(n, box, np.zeros(n), (np.zeros(n),) * 3)
    x, y, z = proto.coordinates()
    r2 = x[:, None, None] ** 2 + y[None, :, None] ** 2 + z[None, None, :] ** 2
    v = amplitude * np.exp(-r2 / (2.0 * width ** 2))
    return GridField(n, box, v, (np.zeros(n),) * 3)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Unitary transforms of V and A on the signed k lattice."""

    n: tuple
    box_length: tuple
    v_hat: np.ndarray
    a_hat: tuple
    gauge_projected: bool = False

    @property
    def k_axes(self):
        return tuple(2 * np.pi * np.fft.fftfreq(n, d=L / n) for n, L in zip(self.n, self.box_length))

    def k_vectors(self):
        kx, ky, kz = self.k_axes
        return (kx[:, None, None], ky[None, :, None], kz[None, None, :])

    def k_magnitude(self):
        kx, ky, kz = self.k_vectors()
        return np.sqrt(kx ** 2 + ky ** 2 + kz ** 2)

    @property
    def k_cell_volume(self):
        return float(np.prod([2 * np.pi / L for L in self.box_length]))

    @property
    def x_cell_volume(self):
        return float(np.prod([L / n for L, n in zip(self.box_length, self.n)]))


def _forward(f, dv):
    return np.fft.fftn(np.fft.ifftshift(f)) * (dv / (2 * np.pi) ** 1.5)


def _inverse(fh, dv):
    return np.fft.fftshift(np.fft.ifftn(fh / (dv / (2 * np.pi) ** 1.5)))


def spectral_transform(field):
    """(dV / (2 pi)^(3/2)) sum_x f(x) e^{-i k.x} for V and each A component."""
    dv = field.cell_volume
    return SpectralField(field.n, field.box_length, _forward(field.v, dv),
                         tuple(_forward(ai, dv) for ai in field.a), False)


def coulomb_project(spectral):
    """Remove the longitudinal part of A: a <- a - (k.a) k / |k|^2 for k != 0."""
    k = spectral.k_vectors()
    k2 = sum(ki ** 2 for ki in k)
    safe = np.where(k2 > 0, k2, 1.0)
    div = sum(ki * ai for ki, ai in zip(k, spectral.a_hat))
    coef = np.where(k2 > 0, div / safe, 0.0)
    a_hat = tuple(ai - coef * ki for ai, ki in zip(spectral.a_hat, k))
    return SpectralField(spectral.n, spectral.box_length, spectral.v_hat, a_hat, True)


@dataclass(frozen=True, eq=False)
class FieldSpectra:
    e_spectrum: np.ndarray
    b_spectrum: np.ndarray
    l2_F_squared: float
    l1_E: float


def field_spectra_and_norms(spectral):
    """|E(k)|^2, |B(k)|^2, the L2 norm squared of (E, B) and the L1 norm of E."""
    if not spectral.gauge_projected:
        raise GaugeError("spectral field must be Coulomb-projected first")
    k = spectral.k_vectors()
    e_hat = [-1j * ki * spectral.v_hat for ki in k]
    ax, ay, az = spectral.a_hat
    kx, ky, kz = k
    b_hat = [1j * (ky * az - kz * ay), 1j * (kz * ax - kx * az), 1j * (kx * ay - ky * ax)]
    e_spec = sum(np.abs(e) ** 2 for e in e_hat)
    b_spec = sum(np.abs(b) ** 2 for b in b_hat)
    dk = spectral.k_cell_volume
    l2 = float(np.sum(e_spec + b_spec) * dk)
    dv = spectral.x_cell_volume
    e_real = [_inverse(e, dv).real for e in e_hat]
    l1 = float(np.sum(np.sqrt(sum(e ** 2 for e in e_real))) * dv)
    return FieldSpectra(e_spec, b_spec, l2, l1)


def grid_metadata(spectral):
    return {"n": list(spectral.n), "box_length": [float(x) for x in spectral.box_length]}
