""" Simulation and verification of central limit theorems for stationary
    random fields

    Models are described by ModelDescriptor (linear or Volterra fields over
    iid or column-mds innovations). The conditions module evaluates the
    projective series exactly, the oracle enumerates Rademacher innovations
    for exact conditional expectations, and experiments / diagnostics run
    replicated Monte Carlo checks through a ReplicationRunner.
"""

from .conditions import MWReport, Verdict, linear_b, model_mw_series, mw_series, mw_x_series
from .config import ExperimentConfig, load_config
from .experiments import CLTReport, VarianceScan, clt_experiment, variance_scan
from .innovations import Distribution, InnovationSpec, Structure, gen_innovations
from .models import CoeffArray, ModelDescriptor, VolterraCoeffs
from .oracle import ExactModel, enumerate_model
from .replication import ReplicationListener, ReplicationRunner, replication_runner
from .simulate import simulate

__ALL__ = [
    CLTReport,
    CoeffArray,
    Distribution,
    ExactModel,
    ExperimentConfig,
    InnovationSpec,
    ModelDescriptor,
    MWReport,
    ReplicationListener,
    ReplicationRunner,
    Structure,
    VarianceScan,
    Verdict,
    VolterraCoeffs,
    clt_experiment,
    enumerate_model,
    gen_innovations,
    linear_b,
    load_config,
    model_mw_series,
    mw_series,
    mw_x_series,
    replication_runner,
    simulate,
    variance_scan,
]
