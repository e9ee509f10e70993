"""dB / dBm / linear conversion helpers used throughout the package."""

import numpy as np


def db2lin(x_db):
    """Convert a dB value to a linear power ratio."""
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def lin2db(x):
    """Convert a linear power ratio to dB."""
    return 10.0 * np.log10(x)


def dbm2watt(x_dbm):
    """Convert a power in dBm to Watts."""
    return 10.0 ** ((np.asarray(x_dbm, dtype=float) - 30.0) / 10.0)


def watt2dbm(p):
    """Convert a power in Watts to dBm."""
    return 10.0 * np.log10(p) + 30.0
