from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import orjson
from loguru import logger
from typing_extensions import TypedDict

from ncsi.optimizer.candidate import SearchBudget

NCSI_CONFIG_FILE_NAME = "ncsiconfig.json"

ConfigFile = TypedDict(
    "ConfigFile",
    {
        "alphabet_cap": int,
        "grid_cap": int,
        "grid_k": int,
        "restarts": int,
        "refine_passes": int,
        "seed": int,
        "tol": float,
        "convexify": bool,
        "progress": bool,
    },
    total=False,
)


@dataclass
class NcsiConfig:
    # current working directory
    cwd: Path
    # maximum size of any channel or auxiliary alphabet accepted from a spec file
    alphabet_cap: int = 6
    # product-space grid size under which searches enumerate exhaustively
    grid_cap: int = 20000
    # simplex grid resolution
    grid_k: int = 8
    # number of random restarts when the grid is too large
    restarts: int = 20
    # coordinate refinement passes after each restart
    refine_passes: int = 3
    # seed of every random stream
    seed: int = 0
    # tolerance of region membership tests and capacity iterations
    tol: float = 1e-9
    # report regions as convex hulls (True) or raw unions (False)
    convexify: bool = True
    # show tqdm progress bars
    progress: bool = False

    @staticmethod
    def from_dir(cwd: Union[Path, str] = ".") -> "NcsiConfig":
        cwd = Path(cwd).absolute()
        if (cwd / NCSI_CONFIG_FILE_NAME).exists():
            with open(cwd / NCSI_CONFIG_FILE_NAME, "r") as f:
                cfg: ConfigFile = orjson.loads(f.read())
            logger.debug("Loaded configuration from {}", cwd / NCSI_CONFIG_FILE_NAME)
        else:
            cfg = ConfigFile()

        if "seed" not in cfg and "NCSI_SEED" in os.environ:
            cfg["seed"] = int(os.environ["NCSI_SEED"])
        if "grid_cap" not in cfg and "NCSI_GRID_CAP" in os.environ:
            cfg["grid_cap"] = int(os.environ["NCSI_GRID_CAP"])

        return NcsiConfig(
            cwd=cwd,
            alphabet_cap=int(cfg.get("alphabet_cap", 6)),
            grid_cap=int(cfg.get("grid_cap", 20000)),
            grid_k=int(cfg.get("grid_k", 8)),
            restarts=int(cfg.get("restarts", 20)),
            refine_passes=int(cfg.get("refine_passes", 3)),
            seed=int(cfg.get("seed", 0)),
            tol=float(cfg.get("tol", 1e-9)),
            convexify=bool(cfg.get("convexify", True)),
            progress=bool(cfg.get("progress", False)),
        )

    def budget(
        self,
        grid_k: Optional[int] = None,
        restarts: Optional[int] = None,
        refine_passes: Optional[int] = None,
        seed: Optional[int] = None,
    ) -> SearchBudget:
        """Search budget of this configuration, with command-line overrides applied."""
        return SearchBudget(
            grid_k=self.grid_k if grid_k is None else grid_k,
            restarts=self.restarts if restarts is None else restarts,
            refine_passes=self.refine_passes if refine_passes is None else refine_passes,
            seed=self.seed if seed is None else seed,
            grid_cap=self.grid_cap,
            progress=self.progress,
        )
