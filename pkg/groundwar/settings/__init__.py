# Settings package - import from base by default
from .base import *
