from .head import *
from .pooling import *
