major = 0
minor = 1
micro = 0
__version__ = f"{major}.{minor}.{micro}"

__pakname__ = "pyDecEnergy"
