#pragma once

#include "error.hpp"
#include "rng.hpp"
#include "mesh.hpp"
#include "obj_io.hpp"
#include "seam_token.hpp"
#include "point_sampler.hpp"
#include "seam_project.hpp"
#include "uv_unwrap.hpp"
#include "seam_eval.hpp"
#include "formats.hpp"
#include "atlas_export.hpp"
#include "autodiff.hpp"
#include "toy_model.hpp"
#include "training.hpp"
#include "checkpoint.hpp"
#include "dpo.hpp"
#include "run_config.hpp"
#include "synthetic.hpp"
