from .errors import CutSpaceError
from .model import *
from .inference import *
