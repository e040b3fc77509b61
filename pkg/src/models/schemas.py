"""
Pydantic models for request/response validation
"""
from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Tuple, Type

from pydantic import BaseModel, ConfigDict, Field, model_validator


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MatrixPayload(_Strict):
    """Square matrix as row-major real and imaginary parts"""
    dim: int = Field(gt=0)
    re: List[float]
    im: Optional[List[float]] = None


class McpPayload(_Strict):
    matrices: List[MatrixPayload]
    dim: Optional[int] = None
    oracle: bool = False


class MaxrootPayload(_Strict):
    coeffs: List[float]  # ascending degree


class DiscriminantPayload(_Strict):
    matrices: List[MatrixPayload]
    method: Literal["permutation", "polarization"] = "permutation"


class SelectorPayload(_Strict):
    """SelectorInstance JSON plus the candidate count r where needed"""
    instance: Dict[str, Any]
    r: Optional[int] = None


class SystemsPayload(_Strict):
    systems: List[Dict[str, Any]]
    blocks: Optional[List[List[int]]] = None
    epsilon: Optional[float] = None
    eps: Optional[List[float]] = None
    constant: Optional[float] = None


class GramPayload(_Strict):
    intervals: List[Tuple[float, float]]
    frequencies: List[int]


class SyndeticPayload(_Strict):
    intervals: List[Tuple[float, float]]
    epsilon: float
    window: int
    constant: Optional[float] = None


class RemovalPayload(_Strict):
    sets: List[List[Tuple[float, float]]]
    window: int
    r: Optional[int] = None
    c_hat: Optional[float] = None


class FrameSamplePayload(_Strict):
    intervals: List[Tuple[float, float]]
    epsilon: float
    window: int
    r: Optional[int] = None
    c_hat: Optional[float] = None


class ReverifyPayload(_Strict):
    certificate: Dict[str, Any]
    tol: Optional[float] = None


# Experiment commands

class Command(str, Enum):
    MCP_EVAL = "mcp-eval"
    MCP_MAXROOT = "mcp-maxroot"
    VERIFY_IDENTITIES = "verify-identities"
    SELECT_WEAVER = "select-weaver"
    SELECT_KS2 = "select-ks2"
    SELECT_BLOCK = "select-block"
    FEICHTINGER = "feichtinger"
    R_EPS = "r-eps"
    BINARY_TREE = "binary-tree"
    METRIC_SEPARATE = "metric-separate"
    SCAL_SAMPLE = "scal-sample"
    EXP_SYNDETIC = "exp-syndetic"
    EXP_REMOVAL = "exp-removal"
    EXP_FRAME = "exp-frame"
    REVERIFY = "reverify"


class McpEvalParams(_Strict):
    dim: int = Field(3, ge=1, le=6)
    count: int = Field(3, ge=0, le=6)
    psd: bool = True
    oracle: bool = True


class McpMaxrootParams(_Strict):
    dim: int = Field(2, ge=1, le=8)
    count: int = Field(1, ge=1, le=8)
    identity: bool = False
    matrices: Optional[List[List[List[float]]]] = None


class IdentityParams(_Strict):
    trials: int = Field(100, ge=1)
    max_dim: int = Field(4, ge=2, le=5)
    max_count: int = Field(4, ge=1, le=5)


class WeaverParams(_Strict):
    dim: int = Field(4, ge=1)
    n: int = Field(16, ge=2)
    r: int = Field(2, ge=2)


class Ks2Params(_Strict):
    dim: int = Field(4, ge=1)
    n: int = Field(16, ge=2)


class BlockParams(_Strict):
    dims: List[int] = [2, 2]
    n: int = Field(16, ge=2)
    r: int = Field(2, ge=1)


class FeichtingerParams(_Strict):
    eps: List[float] = [0.5]
    blocks: int = Field(2, ge=1)


class REpsParams(_Strict):
    bessel: List[float] = [2.0]
    epsilon: float = Field(0.5, gt=0, lt=1)
    blocks: int = Field(2, ge=1)
    constant: float = Field(6.0, gt=0)


class BinaryTreeParams(_Strict):
    dim: int = Field(4, ge=1)
    n: int = Field(32, ge=2)
    depth: int = Field(2, ge=0)


class MetricParams(_Strict):
    start: int = 0
    stop: int = 256
    r: float = Field(4.0, gt=0)
    depth: Optional[int] = None


class ScalParams(_Strict):
    dim: int = Field(3, ge=1)
    count: int = Field(12, ge=1)
    epsilon: float = Field(0.5, gt=0)
    precision_bits: Optional[int] = None


class ExpSyndeticParams(_Strict):
    intervals: List[Tuple[float, float]] = [(0.0, 0.5)]
    epsilon: float = Field(0.5, gt=0, lt=1)
    window: int = Field(128, ge=1)
    constant: Optional[float] = 6.0


class ExpRemovalParams(_Strict):
    sets: List[List[Tuple[float, float]]] = [[(0.0, 0.99)]]
    window: int = Field(128, ge=1)
    r: Optional[int] = None
    c_hat: Optional[float] = 1.0


class ExpFrameParams(_Strict):
    intervals: List[Tuple[float, float]] = [(0.0, 0.015625)]
    epsilon: float = Field(0.9, gt=0, lt=1)
    window: int = Field(128, ge=1)
    r: Optional[int] = None
    c_hat: Optional[float] = 1.0


class ReverifyParams(_Strict):
    certificate: str


COMMAND_PARAMS: Dict[Command, Type[BaseModel]] = {
    Command.MCP_EVAL: McpEvalParams,
    Command.MCP_MAXROOT: McpMaxrootParams,
    Command.VERIFY_IDENTITIES: IdentityParams,
    Command.SELECT_WEAVER: WeaverParams,
    Command.SELECT_KS2: Ks2Params,
    Command.SELECT_BLOCK: BlockParams,
    Command.FEICHTINGER: FeichtingerParams,
    Command.R_EPS: REpsParams,
    Command.BINARY_TREE: BinaryTreeParams,
    Command.METRIC_SEPARATE: MetricParams,
    Command.SCAL_SAMPLE: ScalParams,
    Command.EXP_SYNDETIC: ExpSyndeticParams,
    Command.EXP_REMOVAL: ExpRemovalParams,
    Command.EXP_FRAME: ExpFrameParams,
    Command.REVERIFY: ReverifyParams,
}


class ExperimentConfig(_Strict):
    """One experiment: command, its parameters, the generator seed and an output directory"""
    command: Command
    params: Dict[str, Any] = {}
    seed: int = 0
    output: Optional[str] = None

    @model_validator(mode="after")
    def _check_params(self) -> "ExperimentConfig":
        model = COMMAND_PARAMS[self.command]
        self.params = model.model_validate(self.params).model_dump(mode="json")
        return self
