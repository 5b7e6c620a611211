"""Compact random feature maps for polynomial kernels.

A nonlinear random up-projection captures the kernel accurately in a high
dimension; a random linear down-projection compresses it to a compact space
where a single-pass codeword ridge learner trains multi-class classifiers.
"""

from .craftmap import (
    CraftMapModel,
    DownProjector,
    apply_craftmap,
    apply_craftmap_batch,
    apply_down,
    apply_down_batch,
    build_craftmap,
    build_down_projector,
)
from .data import Dataset, load_csv, load_libsvm, synth, unit_normalize, write_csv
from .hadamard import SrhtOperator, fwht_in_place, pad_pow2, srht_apply, srht_apply_batch
from .kernels import MaclaurinCoeffs, PolyKernelParams, eval_kernel, gram_matrix, maclaurin_coeffs
from .learner import (
    CodeBook,
    EcocModel,
    RidgeAccumulator,
    TrainedModel,
    accumulate,
    make_codebook,
    merge,
    new_accumulator,
    predict,
    predict_batch,
    select_lambda,
    solve,
)
from .metrics import (
    GramApproxReport,
    SpectrumReport,
    classification_error,
    decay_study,
    nrms_error,
    scree,
    weight_histogram,
)
from .rfm import (
    DegreeSampler,
    RfmModel,
    SrhtRfmModel,
    apply_rfm,
    apply_rfm_batch,
    apply_srht_rfm,
    apply_srht_rfm_batch,
    build_rfm,
    build_srht_rfm,
    sample_degree,
    sample_degrees,
)
from .serialize import ModelFormatError, load_model, save_model

__version__ = "0.1.0"
