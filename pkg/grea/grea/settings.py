
from pathlib import Path
import environ
import os

# 프로젝트 설정
PROJECT_NAME = "grea-engine"

BASE_DIR = Path(__file__).resolve().parent.parent

# env
environ.Env.read_env(env_file=os.path.join(BASE_DIR, '.env'))
env = environ.Env()

SECRET_KEY = env.str('SECRET_KEY', default='grea-local-only')
DEBUG = env.bool('DEBUG', default=False)

ALLOWED_HOSTS = []

# ===== Local apps =====
LOCAL_APPS = [
    'apps.common',
    'apps.tensor',
    'apps.graphs',
    'apps.gnn',
    'apps.rationale',
    'apps.trainer',
    'apps.metrics',
    'apps.bench',
]

# ===== Third-Party Apps =====
THIRD_PARTY_APPS = [
    # ----- 설정 파일 검증 (serializers) -----
    'rest_framework',
]

# 모델과 DB 를 쓰지 않는다 (DATABASES 미설정)
INSTALLED_APPS = LOCAL_APPS + THIRD_PARTY_APPS

# ===== Internationalization =====
LANGUAGE_CODE = 'ko-kr'
TIME_ZONE = 'Asia/Seoul'
USE_I18N = True
USE_TZ = True

# ===== Logging =====
# stdout 은 JSON/CSV 출력 전용, 사람이 읽는 로그는 stderr 로 보냄
GREA_LOG_LEVEL = env.str('GREA_LOG_LEVEL', default='INFO')

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "stream": "ext://sys.stderr",
            "formatter": "plain",
        },
    },
    "loggers": {
        "apps": {
            "handlers": ["console"],
            "level": GREA_LOG_LEVEL,
            "propagate": False,
        },
    },
}

# ===== 시드 =====
GREA_SEED = env.int('GREA_SEED', default=0)

# 느린 end-to-end 테스트 (1000개 그래프 학습, B=128 벤치마크)
GREA_RUN_SLOW_TESTS = env.bool('GREA_RUN_SLOW_TESTS', default=False)

# ===== GREA 기본값 =====
# 튜닝 범위: gamma 0.05~0.8, T_sep {1,2}, T_pred {2,3}, lr {0.001,0.005,0.01},
# batch {32,128,256,512}, dim {64,128,300}, L1=2, L2 {2..5}
GREA = {
    "ALPHA": 1.0,
    "BETA": 0.1,     # 1.0 이면 첫 separator 단계에서 mask 가 0 으로 무너진다
    "GAMMA": 0.4,
    "AGG": "sum",
    "T_SEP": 1,
    "T_PRED": 2,
    "NUM_ROUNDS": 20,
    "PATIENCE": 10,
    "LEARNING_RATE": 0.005,
    "BATCH_SIZE": 32,
    "SEP_DIM": 64,
    "PRED_DIM": 64,
    "SEP_LAYERS": 2,
    "PRED_LAYERS": 3,
    "ENCODER": "gin",
    "SEP_ENCODER": None,     # None 이면 ENCODER 와 동일
    "TASK": "binary",
    "MASK_THRESHOLD": 0.5,
    "DIAG_IN_REP": True,
    "LOG_TARGET": False,
    "MASK_MODE": "learned",
    "SPLIT_RATIOS": (0.6, 0.1, 0.3),
    "CHECKPOINT_HEADER": "GREA-CKPT-1",
    "GRAD_CHECK_EPS": 1e-5,
    "GRAD_CHECK_TOL": 1e-4,
}
