"""Built-in examples, run/sweep pipeline, config files and the command line."""

from .config import ModelConfig, dump_config, load_config, loads_config
from .examples import EXAMPLE_IDS, ExampleProblem, beam_eigen, build_example, exact_solutions
from .run import Problem, RunReport, SweepResult, l2_error, run, sweep
