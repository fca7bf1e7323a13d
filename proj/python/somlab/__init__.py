"""SOM process laboratory: training, mean-field analysis, quantization and
categorical maps, backed by the C++ core."""

from somlab._somlab import (
    Gain,
    Lattice,
    Neighborhood,
    SomlabError,
    State,
    Stimuli,
    classify_1d,
    classify_fpp,
    distortion,
    distortion_gradient,
    evaluate_h,
    grid_state,
    kacm,
    korresp,
    optimal_quantizer_1d,
    quantize_integrate,
    run_som,
    solve_equilibrium,
    som_step,
    uniform_equilibrium,
    winner,
    zador_scan,
)

__all__ = [
    "Gain",
    "Lattice",
    "Neighborhood",
    "SomlabError",
    "State",
    "Stimuli",
    "classify_1d",
    "classify_fpp",
    "distortion",
    "distortion_gradient",
    "evaluate_h",
    "grid_state",
    "kacm",
    "korresp",
    "optimal_quantizer_1d",
    "quantize_integrate",
    "run_som",
    "solve_equilibrium",
    "som_step",
    "uniform_equilibrium",
    "winner",
    "zador_scan",
]
