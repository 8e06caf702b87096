"""Tabulated optical constants (Au, Si) and the solar spectrum.

CSV format: comma separated, one required header line, UTF-8, LF or CRLF,
lines starting with ``#`` ignored. Dispersion files carry
``wavelength_nm,n,k``; spectrum files carry ``wavelength_nm,irradiance_W_m2_nm``.
Queries are restricted to the tabulated range; interpolation is linear in
n and k (and irradiance) independently.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .tmm import ComplexIndex

__all__ = [
    "DispersionTable",
    "SolarSpectrum",
    "TableParseError",
    "load_dispersion",
    "load_spectrum",
    "save_dispersion",
    "save_spectrum",
    "index_at",
    "photon_flux",
    "default_data_dir",
    "gold_table",
    "silicon_table",
    "solar_spectrum",
]

# Planck constant times speed of light, J*m
HC_J_M = 1.98644586e-25

DISPERSION_HEADER = "wavelength_nm,n,k"
SPECTRUM_HEADER = "wavelength_nm,irradiance_W_m2_nm"


class TableParseError(ValueError):
    """CSV parse or validation failure, carrying file and line context."""


@dataclass(frozen=True)
class DispersionTable:
    material_id: str
    wavelengths: np.ndarray
    n: np.ndarray
    k: np.ndarray

    @property
    def wavelength_range(self):
        return float(self.wavelengths[0]), float(self.wavelengths[-1])


@dataclass(frozen=True)
class SolarSpectrum:
    wavelengths: np.ndarray
    irradiance: np.ndarray

    @property
    def wavelength_range(self):
        return float(self.wavelengths[0]), float(self.wavelengths[-1])


def _read_rows(path, expected_header, n_cols):
    rows = []
    header_seen = False
    with open(path, encoding="utf-8", newline="") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if not header_seen:
                if line.replace(" ", "") != expected_header:
                    raise TableParseError(
                        f"{path}:{lineno}: expected header '{expected_header}', got '{line}'")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != n_cols:
                raise TableParseError(f"{path}:{lineno}: expected {n_cols} columns, got {len(parts)}")
            try:
                rows.append(tuple(float(p) for p in parts))
            except ValueError:
                raise TableParseError(f"{path}:{lineno}: non-numeric value in '{line}'") from None
    if not header_seen:
        raise TableParseError(f"{path}: missing header line '{expected_header}'")
    return rows


def load_dispersion(path) -> DispersionTable:
    """Load and validate a ``wavelength_nm,n,k`` table."""
    path = Path(path)
    rows = _read_rows(path, DISPERSION_HEADER, 3)
    if len(rows) < 2:
        raise TableParseError(f"{path}: need at least 2 samples, got {len(rows)}")
    wl = np.array([r[0] for r in rows])
    n = np.array([r[1] for r in rows])
    k = np.array([r[2] for r in rows])
    if np.any(np.diff(wl) <= 0):
        bad = int(np.argmax(np.diff(wl) <= 0)) + 1
        raise TableParseError(f"{path}: wavelengths must be strictly increasing (sample {bad + 1})")
    if np.any(k < 0):
        raise TableParseError(f"{path}: extinction coefficient k must be >= 0")
    return DispersionTable(material_id=path.stem, wavelengths=wl, n=n, k=k)


def load_spectrum(path) -> SolarSpectrum:
    """Load and validate a ``wavelength_nm,irradiance_W_m2_nm`` table."""
    path = Path(path)
    rows = _read_rows(path, SPECTRUM_HEADER, 2)
    if len(rows) < 2:
        raise TableParseError(f"{path}: need at least 2 samples, got {len(rows)}")
    wl = np.array([r[0] for r in rows])
    irr = np.array([r[1] for r in rows])
    if np.any(np.diff(wl) <= 0):
        raise TableParseError(f"{path}: wavelengths must be strictly increasing")
    if np.any(irr < 0):
        raise TableParseError(f"{path}: irradiance must be >= 0")
    return SolarSpectrum(wavelengths=wl, irradiance=irr)


def save_dispersion(table: DispersionTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(DISPERSION_HEADER + "\n")
        for wl, n, k in zip(table.wavelengths, table.n, table.k):
            f.write(f"{format(wl, '.17g')},{format(n, '.17g')},{format(k, '.17g')}\n")


def save_spectrum(spectrum: SolarSpectrum, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(SPECTRUM_HEADER + "\n")
        for wl, irr in zip(spectrum.wavelengths, spectrum.irradiance):
            f.write(f"{format(wl, '.17g')},{format(irr, '.17g')}\n")


def _check_range(wl, lo, hi, what):
    if np.any(np.asarray(wl) < lo) or np.any(np.asarray(wl) > hi):
        raise ValueError(f"wavelength query outside {what} range [{lo}, {hi}] nm")


def index_at(table: DispersionTable, wavelength: float) -> ComplexIndex:
    """Linearly interpolated complex index at one wavelength (nm)."""
    lo, hi = table.wavelength_range
    _check_range(wavelength, lo, hi, table.material_id)
    n = float(np.interp(wavelength, table.wavelengths, table.n))
    k = float(np.interp(wavelength, table.wavelengths, table.k))
    return ComplexIndex(n, k)


def index_array(table: DispersionTable, wavelengths) -> np.ndarray:
    """Interpolated complex indices over a wavelength grid."""
    lo, hi = table.wavelength_range
    _check_range(wavelengths, lo, hi, table.material_id)
    n = np.interp(wavelengths, table.wavelengths, table.n)
    k = np.interp(wavelengths, table.wavelengths, table.k)
    return n + 1j * k


def photon_flux(spectrum: SolarSpectrum, wavelength: float) -> float:
    """Spectral photon flux in photons m^-2 s^-1 nm^-1 at one wavelength."""
    lo, hi = spectrum.wavelength_range
    _check_range(wavelength, lo, hi, "spectrum")
    irr = float(np.interp(wavelength, spectrum.wavelengths, spectrum.irradiance))
    return irr * (wavelength * 1e-9) / HC_J_M


def photon_flux_array(spectrum: SolarSpectrum, wavelengths) -> np.ndarray:
    lo, hi = spectrum.wavelength_range
    _check_range(wavelengths, lo, hi, "spectrum")
    irr = np.interp(wavelengths, spectrum.wavelengths, spectrum.irradiance)
    return irr * (np.asarray(wavelengths) * 1e-9) / HC_J_M


def default_data_dir() -> Path:
    """Shipped data directory, overridable via PHOTOBENCH_DATA_DIR."""
    env = os.environ.get("PHOTOBENCH_DATA_DIR")
    if env:
        return Path(env)
    return Path(__file__).parent / "data"


@lru_cache(maxsize=8)
def _dispersion_cached(path_str: str) -> DispersionTable:
    return load_dispersion(path_str)


@lru_cache(maxsize=8)
def _spectrum_cached(path_str: str) -> SolarSpectrum:
    return load_spectrum(path_str)


def gold_table() -> DispersionTable:
    return _dispersion_cached(str(default_data_dir() / "au_nk.csv"))


def silicon_table() -> DispersionTable:
    return _dispersion_cached(str(default_data_dir() / "si_nk.csv"))


def solar_spectrum() -> SolarSpectrum:
    return _spectrum_cached(str(default_data_dir() / "am15.csv"))
