import logging
import os
import sys

# 格式
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"

LOG_LEVEL = os.getenv("FRACTAL_WM_LOG_LEVEL", "INFO").upper()


def get_logger(name: str):
    logger = logging.getLogger(name)

    # 避免重複 handler
    if not logger.handlers:
        # stdout 留給指令輸出 (report / summary)，log 一律寫 stderr
        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(LOG_LEVEL)
        formatter = logging.Formatter(LOG_FORMAT)
        handler.setFormatter(formatter)
        logger.addHandler(handler)
        logger.setLevel(LOG_LEVEL)
        logger.propagate = False

    return logger
