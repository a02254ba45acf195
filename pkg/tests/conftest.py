import pathlib

import pytest

from berthplan.dynamics import (HullCoeffs, PropellerCoeffs, RudderCoeffs,
                                ShipParticulars, ThrusterCoeffs, WindCoeffs)

SCENARIO_DIR = pathlib.Path(__file__).resolve().parent.parent / "scenarios"
TOY_SCENARIO = SCENARIO_DIR / "toy_basin_berthing.json"
FULLSCALE_SCENARIO = SCENARIO_DIR / "fullscale_berthing.json"


def small_ship() -> ShipParticulars:
    """50 m coaster used across the suite; numbers chosen for plausible
    accelerations, not tied to any particular vessel."""
    return ShipParticulars(
        l_pp=50.0, breadth=9.0, mass=1.02e6, added_mass_x=5.1e4,
        added_mass_y=8.2e5, inertia_z=1.6e8, added_inertia_z=8.0e7,
        rho_water=1025.0,
        hull=HullCoeffs(x_u=1.0e3, x_uu=2.5e3, x_vr=2.0e4,
                        y_v=4.0e4, y_vv=6.0e4, y_r=1.0e5, y_rr=0.0,
                        n_v=2.0e5, n_vv=0.0, n_r=5.0e7, n_rr=5.0e8),
        propeller=PropellerCoeffs(k_t0=0.45, diameter=2.6,
                                  thrust_deduction=0.2, lateral_offset=2.8),
        rudder=RudderCoeffs(area=2.5, f_alpha=2.7, epsilon=1.1, kappa=0.5,
                            gamma_flow=0.45, l_r=-25.0, x_r=-25.0,
                            t_r=0.3, a_h=0.3, x_h=-22.5),
        bow_thruster=ThrusterCoeffs(k_force=0.45, diameter=1.2, x_pos=22.0),
        stern_thruster=ThrusterCoeffs(k_force=0.45, diameter=1.2, x_pos=-22.0),
        wind=WindCoeffs(rho_air=1.225, front_area=60.0, lateral_area=300.0,
                        cx=(0.0, -0.7, 0.05), cy=(-0.9, 0.05, -0.05),
                        cn=(-0.1, 0.1, 0.02)))


@pytest.fixture
def ship():
    return small_ship()
