from .text import *
from .vocab import *
from .wordpiece import *
