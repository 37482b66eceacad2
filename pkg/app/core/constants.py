from datetime import timedelta

# --- Time series ---

DEFAULT_STEP = timedelta(minutes=15)
SAMPLES_PER_DAY = 96
MINUTES_PER_DAY = 1440
MONTHS_PER_YEAR = 12

# --- Features ---

# Column order is part of the persisted model format.
FEATURE_COLUMNS: list[str] = [
    "ghat_sq",
    "ghat",
    "ghat_that",
    "that",
    "that_sq",
    "month_sin",
    "month_cos",
    "minute_sin",
    "minute_cos",
]
N_FEATURES = len(FEATURE_COLUMNS)
STD_FLOOR = 1e-9

# --- Estimators (configuration space) ---

RIDGE_ALPHA_RANGE = (0.05, 1.0)
MLP_ACTIVATIONS = ("logistic", "tanh", "relu")
MLP_LAYER_COUNT_RANGE = (1, 3)
MLP_LAYER_WIDTH_RANGE = (10, 100)
GB_LEARNING_RATE_RANGE = (0.01, 1.0)
N_ESTIMATORS_RANGE = (10, 300)
MAX_DEPTH_RANGE = (1, 10)

MIN_TRAINING_ROWS = 20
RF_MAX_FEATURES = 3  # ceil(9 / 3)

MLP_MAX_EPOCHS = 300
MLP_BATCH_SIZE = 256
MLP_LEARNING_RATE = 1e-3
MLP_BETA_1 = 0.9
MLP_BETA_2 = 0.999
MLP_EPSILON = 1e-8
MLP_VALIDATION_FRACTION = 0.1
MLP_TOL = 1e-5
MLP_N_ITER_NO_CHANGE = 20

# --- CASH ---

DEFAULT_MAX_TRIALS = 200
PLATEAU_TOP_K = 10
PLATEAU_STD_THRESHOLD = 1e-3
PLATEAU_PATIENCE = 15
CASH_VALIDATION_FRACTION = 0.2

# --- Plant pipeline ---

MIN_TRAINING_DAYS = 60

# --- Ensemble ---

DEFAULT_CYCLE_DAYS = 28
DEFAULT_WINDOW_SAMPLES = 28 * SAMPLES_PER_DAY
SIMPLEX_TOL = 1e-9
DEGENERATE_WEIGHT_SUM = 1e-9
WEIGHT_TIKHONOV = 1e-10

# --- Synthetic fleet ---

CLEAR_SKY_IRRADIANCE = 1000.0  # W/m2
ATMOSPHERIC_EXPONENT = 1.2
MAX_SUPPORTED_LATITUDE = 66.5
TEMPERATURE_COEFFICIENT = 0.004  # per degC above reference
REFERENCE_TEMPERATURE = 25.0
CLOUD_FACTOR_RANGE = (0.1, 1.0)
POWER_CEILING = 1.2  # fraction of p_n
FORECAST_SMOOTHING_SAMPLES = 8  # 2 h at 15 min
DEFAULT_LATITUDE = 49.0

# --- Evaluation ---

METHOD_IM_HDA = "IM-HDA"
METHOD_IM_IT = "IM-IT"
METHOD_AVERAGING = "Averaging"
METHOD_AUTOPV = "AutoPV"
METHODS: list[str] = [
    METHOD_IM_HDA,
    METHOD_IM_IT,
    METHOD_AVERAGING,
    METHOD_AUTOPV,
]
SUMMER_MONTHS = frozenset({4, 5, 6, 7, 8, 9})

# --- Persistence ---

ESTIMATOR_FORMAT_VERSION = "autopv.estimator/1"
PLANT_MODEL_FORMAT_VERSION = "autopv.plant-model/1"
REPORT_FORMAT_VERSION = "autopv.report/1"
