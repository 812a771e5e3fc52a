"""MCMC that stays exact when driven by a dependent stream of reals.

The package keeps each sampler's driving uniforms inside the chain state,
refreshes them by adding stream outputs modulo one, and pairs every
deterministic move with the uniform rewrite that would reverse it.  The
resulting chains leave their targets invariant for any stream that never
looks at the chain state, whatever its marginal or dependence structure.
"""

from .augmented import (
    AugmentedState,
    clamp_unit,
    kernel_step,
    mod_one,
    shift_uniform,
    step_continuous,
    step_discrete,
    sweep,
)
from .diagnostics import (
    EstimateReport,
    Trace,
    effective_sample_size,
    estimate,
    thin_trace,
)
from .experiments import (
    ExperimentConfig,
    ExperimentResult,
    run_ar_variance_experiment,
    run_experiment,
    run_funnel_experiment,
    run_interleaved_experiment,
    run_ring_experiment,
)
from .kernels import (
    ARKernel,
    DiscreteKernel,
    GibbsCoordinateKernel,
    TabularKernel,
    ar_forward_quantile,
    conditional_pmf,
    gaussian_conditional_kernel,
    gibbs_conditional_kernel,
    norm_cdf,
    norm_ppf,
    reverse_from_target,
    reverse_transition_matrix,
    stationary_distribution,
)
from .mh import GaussianRandomWalkProposal, MHState, acceptance_prob, mh_step
from .slice_sampler import (
    SliceParams,
    SliceState,
    naive_slice_step,
    slice_step,
    slice_step_reverse,
)
from .streams import (
    ConstantStream,
    FileStream,
    IidUniformStream,
    ReplayStream,
    StickyStream,
    Stream,
    StreamRecorder,
    make_file_stream,
    make_sticky,
    next_value,
)
from .targets import (
    CorrelatedGaussianPair,
    FunnelState,
    funnel_exact_sample,
    funnel_logpdf,
    funnel_logpdf_grad,
    funnel_v_conditional,
    funnel_x_conditional,
    ring_walk_step,
    unit_gaussian_logpdf,
)
from .validation import (
    PushforwardReport,
    brute_force_discrete_step,
    enumerated_small_kernels,
    invariance_check,
    ks_critical_value,
)

__version__ = "0.1.0"
