from __future__ import annotations

from fastapi import Depends, FastAPI, HTTPException

from sensorimap import __version__
from sensorimap.core.config import get_settings
from sensorimap.core.exceptions import InputError, ParameterError, SnapshotError, UntrainedLinkError
from sensorimap.core.logging import configure_logging, get_logger
from sensorimap.schemas import ForwardRequest, ForwardResponse, InverseRequest, InverseResponse, ModelInfo
from sensorimap.service import SensorimapService, get_service


logger = get_logger(__name__)


app = FastAPI(title="Sensorimotor map query service", version=__version__)


@app.on_event("startup")
def _startup() -> None:
    settings = get_settings()
    configure_logging(settings.log_level)
    logger.info("startup env=%s snapshot=%s mode=%s", settings.app_env, settings.snapshot_path, settings.query_mode)


def _http_error(e: Exception) -> HTTPException:
    if isinstance(e, UntrainedLinkError):
        return HTTPException(status_code=422, detail=str(e))
    if isinstance(e, (InputError, ParameterError)):
        return HTTPException(status_code=400, detail=str(e))
    if isinstance(e, SnapshotError):
        return HTTPException(status_code=503, detail=str(e))
    return HTTPException(status_code=500, detail=str(e))


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.get("/model", response_model=ModelInfo)
def model_info(svc: SensorimapService = Depends(get_service)) -> ModelInfo:
    try:
        return ModelInfo(**svc.describe())
    except Exception as e:  # noqa: BLE001
        logger.exception("/model failed")
        raise _http_error(e) from e


@app.post("/forward", response_model=ForwardResponse)
def forward(req: ForwardRequest, svc: SensorimapService = Depends(get_service)) -> ForwardResponse:
    try:
        return ForwardResponse(**svc.forward(req.joints_rad, mode=req.mode, sigma_q=req.sigma_q))
    except Exception as e:  # noqa: BLE001
        logger.exception("/forward failed")
        raise _http_error(e) from e


@app.post("/inverse", response_model=InverseResponse)
def inverse(req: InverseRequest, svc: SensorimapService = Depends(get_service)) -> InverseResponse:
    try:
        return InverseResponse(**svc.inverse(req.position_mm, mode=req.mode, sigma_q=req.sigma_q))
    except Exception as e:  # noqa: BLE001
        logger.exception("/inverse failed")
        raise _http_error(e) from e
