from iclab.convergence.conditioning import (
    LR_INVERSE_LAMBDA_MAX, ConditioningReport, RaceResult, jacobi_eigenvalues,
    hessian_condition, planted_design, gradient_descent, linreg_gd_race
)
from iclab.convergence.zigzag import (
    RELU_FED, IC_FED, SignCoherenceReport, CoherenceProbabilityReport,
    ZigzagReport, sign_coherence, expected_coherence, coherence_probability,
    random_probe_net, head_sign_coherence, zigzag_trials
)
