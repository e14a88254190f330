from .records import *
from .agreement import *
from .sampling import *
from .statistics import *
