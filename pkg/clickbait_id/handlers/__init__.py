from .tensorboard_logger import *
from .tqdm_logger import *
