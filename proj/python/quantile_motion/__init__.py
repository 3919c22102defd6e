"""Quantile (probability-flow) trajectories for 1D and 3D wave packets.

Units: hbar = m = 1.
"""

from ._core import *  # noqa: F401,F403
from ._core import (
    Barrier,
    GaussianPacket,
    build_kgrid,
    free_spectral_model,
    SpectralFunction,
    tunneling_packet_model,
)


def spectral_models(packet=None, barrier=None, k_nodes=256, k_sigmas=6.0):
    """(free, tunneling) spectral models sharing one k grid."""
    packet = packet or GaussianPacket()
    barrier = barrier or Barrier()
    grid = build_kgrid(packet.v_bar, packet.sigma_p, k_sigmas, k_nodes)
    spectral = SpectralFunction.from_packet(packet, grid)
    return free_spectral_model(spectral, grid), tunneling_packet_model(spectral, barrier, grid)

