__version__ = "0.4.0"
__author__ = "Guilherme Costa"
__description__ = "Constraint learning, certification and querying for network measurement tables"
