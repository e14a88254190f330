from .classification import *
from .roc import *
