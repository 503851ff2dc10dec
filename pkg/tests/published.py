"""Published coefficient cells (coefficient with stars, standard error).

Two regressions each in volume and value: the three-group model and the
model with the New World split into LNW and ANW.  Rows use the package's
canonical regressor names.
"""

THREE_GROUP = {
    "volume": {
        "NIRW": "-0.019* (0.007)", "OW": "-0.066*** (0.037)", "NW": "-0.129* (0.040)",
        "NIRW_x_OW": "0.029 (0.021)", "NIRW_x_NW": "0.056* (0.018)", "RMP": "0.000 (0.000)",
        "EU68-98": "0.025* (0.006)", "EURO99-05": "0.016*** (0.009)",
        "CHRIST_RULER": "0.142* (0.055)", "MUSLIM_RULER": "-0.218* (0.057)",
        "DISTLAT3050": "-0.005** (0.002)", "AVERAGE_TEMP": "0.009* (0.003)",
        "QUINQ61-65": "0.003 (0.008)", "QUINQ61-65_x_OW": "-0.014 (0.017)",
        "QUINQ61-65_x_RW": "-0.009 (0.009)",
    },
    "value": {
        "NIRW": "0.916* (0.105)", "OW": "1.711* (0.181)", "NW": "0.048 (0.135)",
        "NIRW_x_OW": "-3.111* (0.328)", "NIRW_x_NW": "-0.572** (0.231)", "RMP": "-0.003* (0.000)",
        "EU68-98": "-0.004 (0.035)", "EURO99-05": "-0.039 (0.051)",
        "CHRIST_RULER": "0.317* (0.090)", "MUSLIM_RULER": "-0.078 (0.107)",
        "DISTLAT3050": "-0.009** (0.004)", "AVERAGE_TEMP": "0.016* (0.005)",
        "QUINQ61-65": "0.087 (0.067)", "QUINQ61-65_x_OW": "-0.583* (0.143)",
        "QUINQ61-65_x_RW": "0.246* (0.073)",
    },
}

SPLIT = {
    "volume": {
        "NIRW": "-0.019* (0.007)", "OW": "-0.066*** (0.038)", "LNW": "-0.140* (0.052)",
        "ANW": "-0.120** (0.049)", "NIRW_x_OW": "0.029 (0.021)", "NIRW_x_LNW": "0.054** (0.022)",
        "NIRW_x_ANW": "0.058* (0.020)", "RMP": "0.000 (0.000)", "EU68-98": "0.025* (0.006)",
        "EURO99-05": "0.016*** (0.010)", "CHRIST_RULER": "0.145* (0.056)",
        "MUSLIM_RULER": "-0.216* (0.057)", "DISTLAT3050": "-0.005** (0.002)",
        "AVERAGE_TEMP": "0.010* (0.003)", "QUINQ61-65": "0.002 (0.008)",
        "QUINQ61-65_x_OW": "-0.014 (0.017)", "QUINQ61-65_x_RW": "-0.009 (0.009)",
    },
    "value": {
        "NIRW": "0.914* (0.106)", "OW": "1.709* (0.181)", "LNW": "0.019 (0.166)",
        "ANW": "0.069 (0.152)", "NIRW_x_OW": "-3.108* (0.328)", "NIRW_x_LNW": "-0.530*** (0.282)",
        "NIRW_x_ANW": "-0.601** (0.257)", "RMP": "-0.003* (0.000)", "EU68-98": "-0.004 (0.035)",
        "EURO99-05": "-0.039 (0.051)", "CHRIST_RULER": "0.318* (0.091)",
        "MUSLIM_RULER": "-0.077 (0.107)", "DISTLAT3050": "-0.009** (0.004)",
        "AVERAGE_TEMP": "0.016* (0.006)", "QUINQ61-65": "0.086 (0.068)",
        "QUINQ61-65_x_OW": "-0.582* (0.144)", "QUINQ61-65_x_RW": "0.245* (0.074)",
    },
}


def parse(cell: str) -> tuple[float, str, float]:
    """``"-0.019* (0.007)"`` -> (-0.019, "*", 0.007)."""
    head, se = cell.split(" (")
    stars = head[len(head.rstrip("*")):]
    return float(head.rstrip("*")), stars, float(se.rstrip(")"))
