from iclab.infotheory.joint import (
    DiscreteJoint, GatedJoint, random_joint, sample_joint
)
from iclab.infotheory.measures import (
    entropy, bernoulli_entropy, mutual_information
)
from iclab.infotheory.gating import (
    apply_gates, gate_by_enumeration, gated_marginal
)
from iclab.infotheory.theorem import (
    MIN_CORRELATION_SAMPLES, TheoremReport, CorrelationReport,
    verify_theorem1, gated_correlation, correlation_scaling_check
)
from iclab.infotheory.estimators import (
    MIEstimate, empirical_mi, gating_mi_ratio
)
