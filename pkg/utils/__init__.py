from utils.errors import CalculusError, ComputationError, ValidationError
from utils.expression import Expression, parse_expression
from utils.level_runner import LevelRunner, run_levels
from utils.progress import Progress
