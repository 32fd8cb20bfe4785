"""Lifted contact dynamics for direct multiple shooting of rigid-body systems."""

from .liegroup import ConfigurationSpace, Configuration
from .robotmodel import (
    ContactStatus,
    ModelError,
    RobotModel,
    builtin_arm3,
    builtin_monoped,
    builtin_pendulum,
    builtin_quadruped,
    builtin_slider,
    load_model,
    load_model_file,
    dump_model,
)
from .dynamics import BaumgarteParams, SingularContactError

__version__ = "0.1.0"
