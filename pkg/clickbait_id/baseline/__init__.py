from .gbt import *
from .tfidf import *
