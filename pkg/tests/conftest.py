import math
import os
import sys

# 将项目根目录添加到 Python 的模块搜索路径中
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import numpy as np
import pytest
from click.testing import CliRunner

from config import TestingConfig  # 导入测试配置
from icelab.grid import DIRICHLET, HorizontalGrid, LayerGrid
from icelab.settings import load_config


@pytest.fixture(scope='session')  # session 级别, 整个测试会话只构建一次
def config():
    """Validated RunConfig built from TestingConfig."""
    return load_config(TestingConfig)


@pytest.fixture(scope='session')
def model(config):
    """Small coupled model (16 x 16 plane, 9 levels per layer)."""
    return config.build_model()


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


@pytest.fixture()
def runner():
    """A click test runner for the command line."""
    return CliRunner()


@pytest.fixture(scope='session')
def plane():
    return HorizontalGrid(16, 16)


@pytest.fixture(scope='session')
def layer():
    """Ocean-like layer (-1, 0) with Dirichlet rows at both ends."""
    return LayerGrid(16, 16, 2 * math.pi, 2 * math.pi, 17, -1.0, 0.0, DIRICHLET, DIRICHLET)


@pytest.fixture()
def small_config_file(tmp_path):
    """Write a key=value config on the small grid; returns a function taking extra lines."""
    def write(*lines):
        path = tmp_path / "run.cfg"
        base = [
            "grid.nx=16", "grid.ny=16", "grid.nz_atm=9", "grid.nz_ocn=9",
            "time.t_end=0.03", "time.n_out=1",
            f"run.output_dir={tmp_path / 'out'}",
            "run.log_level=WARNING",
        ]
        path.write_text("\n".join(base + list(lines)) + "\n")
        return str(path)
    return write
