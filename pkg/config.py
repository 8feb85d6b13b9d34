import math
import os
from dotenv import load_dotenv

# 定位 .env 文件所在的目录 (项目根目录)
basedir = os.path.abspath(os.path.dirname(__file__))
load_dotenv(os.path.join(basedir, '.env'))  # 加载 .env 文件


class Config:
    # 进程级设置, 可由环境变量覆盖
    LOG_LEVEL = os.environ.get('ICELAB_LOG_LEVEL') or 'INFO'
    OUTPUT_DIR = os.environ.get('ICELAB_OUTPUT_DIR') or os.path.join(basedir, 'output')
    WORKERS = int(os.environ.get('ICELAB_WORKERS') or 1)
    SEED = int(os.environ.get('ICELAB_SEED') or 20240607)

    # 物理常数 (SI)
    PHYS = {
        'rho_atm': 1.3, 'rho_ocn': 1026.0, 'rho_ice': 900.0,
        'C_atm': 1.2e-3, 'C_ocn': 5.5e-3, 'theta_atm': 0.0, 'theta_ocn': 0.0,
        'p_star': 27500.0, 'c_star': 20.0, 'e_ratio': 2.0, 'delta_reg': 2e-9,
        'd_h': 1e-2, 'd_a': 1e-2, 'g_grav': 9.81,
        'kappa1': 0.1, 'kappa2': 3.0, 'h_ocn': 1.0, 'h_atm': 4.0,
        'coriolis': 0.0,
    }

    GRID = {'nx': 32, 'ny': 32, 'lx': 2 * math.pi, 'ly': 2 * math.pi, 'nz_atm': 33, 'nz_ocn': 33}

    TIME = {'dt': 1e-2, 't_end': 1.0, 'n_out': 10, 'theta': 1.0}

    GROWTH = {'kind': 'decaying-exponential', 'f0': 0.0, 'h_ref': 1.0, 'breakpoints': [], 'values': []}

    # 内置场景: calm, constant-wind, strong-melt, manufactured
    FORCING = {
        'scenario': 'constant-wind',
        'h_mean': 1.0, 'a_mean': 0.9, 'h_amplitude': 0.01,
        'wind_speed': 10.0, 'melt_rate': 2.0, 'amplitude': 0.1,
    }

    SOLVER = {
        'mu': 1.0, 'tol_couple': 1e-8, 'max_picard': 50,
        'ice_method': 'gmres', 'ice_tol': 1e-10, 'ice_maxiter': 200, 'ice_restart': 40,
        'normal_sign': 1.0,
    }

    RUN = {'v_margin': 1e-3, 'overflow_guard': 1e12}


class TestingConfig(Config):  # 测试用小网格, 短时长
    TESTING = True
    LOG_LEVEL = 'WARNING'
    WORKERS = 1
    SEED = 12345

    GRID = {'nx': 16, 'ny': 16, 'lx': 2 * math.pi, 'ly': 2 * math.pi, 'nz_atm': 9, 'nz_ocn': 9}
    TIME = {'dt': 1e-2, 't_end': 5e-2, 'n_out': 2, 'theta': 1.0}
