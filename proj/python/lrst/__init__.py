"""Low-Tucker-rank plus sparse tensor estimation.

Thin wrapper over the compiled extension: Riemannian gradient descent with
gradient pruning, projected gradient descent, HOSVD/HOOI, synthetic instance
generators and the LRST tensor file format.
"""

try:
    from . import _lrst as _impl  # installed wheel layout
except ImportError:  # build-tree layout: extension directly on sys.path
    import _lrst as _impl

add_gaussian_noise = _impl.add_gaussian_noise
bic_scan = _impl.bic_scan
fit = _impl.fit
gen_lowrank = _impl.gen_lowrank
gen_sparse = _impl.gen_sparse
hooi = _impl.hooi
hosvd = _impl.hosvd
level_alpha_active_indices = _impl.level_alpha_active_indices
read_lrst = _impl.read_lrst
sample_bernoulli = _impl.sample_bernoulli
sample_poisson = _impl.sample_poisson
spectral_summary = _impl.spectral_summary
spikiness = _impl.spikiness
trim = _impl.trim
write_lrst = _impl.write_lrst

__all__ = [
    "add_gaussian_noise",
    "bic_scan",
    "fit",
    "gen_lowrank",
    "gen_sparse",
    "hooi",
    "hosvd",
    "level_alpha_active_indices",
    "read_lrst",
    "sample_bernoulli",
    "sample_poisson",
    "spectral_summary",
    "spikiness",
    "trim",
    "write_lrst",
]
