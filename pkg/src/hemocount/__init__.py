"""hemocount: semi-automatic blood-smear cell segmentation and counting."""

from .edges import CannyParams, canny
from .estimators import (
    BloodSmearAnalyzer,
    ButterworthLowpass,
    CannyEdges,
    HistogramEqualizer,
    OtsuBinarizer,
    RedCellCounter,
    WhiteCellDetector,
)
from .hough import (
    DegenerateFillError,
    HoughParams,
    WhiteCell,
    cytoplasm_mask,
    detect_white_cells,
    disc_mask,
    hough_circle_center,
    remove_white_cells,
)
from .matching import (
    DegenerateTemplateError,
    PeakParams,
    Template,
    combine_maps,
    count_red_cells,
    extract_templates,
    ncc_map,
    peak_regions,
    tune_weights,
)
from .netpbm import NetpbmParseError, load_image, load_pgm, load_ppm, save_image, save_pgm, save_ppm
from .pipeline import (
    AnalysisReport,
    ConfigError,
    PipelineConfig,
    PipelineResult,
    PipelineStageError,
    TemplateSpec,
    classify_pixels,
    render_overlay,
    run_pipeline,
)
from .raster import PointRC, Rect, clamp01, histogram256
from .segmentation import (
    NucleusGroup,
    Region,
    binarize_dark,
    label_8conn,
    merge_nuclei,
    otsu_level,
    search_window,
)
from .spectral import (
    ButterworthParams,
    SpectralConsistencyError,
    Spectrum,
    butterworth_gain,
    dft2,
    equalize_histogram,
    idft2,
    lowpass_filter,
    spectrum_view,
)
from .synth import PackingError, SynthSpec, SynthTruth, synth_smear

__version__ = "0.1.0"
