# app/operations/__init__.py
"""
Computations on validated parameters.

Modules:
- model: SI parameters to dimensionless constants, steady state, cooling rates.
- dynamics: Linear model, stability, Lyapunov and spectral covariance matrices.
- gaussian: Symplectic spectra, logarithmic negativity, resonant closed forms.
- output: Filtered output modes, their covariance matrix and the output spectrum.
- tripartite: One-vs-rest classification of three-mode states.
- oracle: Trajectory-ensemble estimate of the stationary covariance matrix.
- sweep: Parameter grids evaluated in parallel, written as CSV plus a JSON sidecar.
- render: SVG heatmaps and line plots of sweep results.
- verify: Cross-checks between independent routes.
"""
