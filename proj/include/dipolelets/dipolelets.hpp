#pragma once

#include "dipolelets/bands.hpp"
#include "dipolelets/config.hpp"
#include "dipolelets/errors.hpp"
#include "dipolelets/fft.hpp"
#include "dipolelets/grid.hpp"
#include "dipolelets/kernel.hpp"
#include "dipolelets/metrics.hpp"
#include "dipolelets/parallel.hpp"
#include "dipolelets/pipeline.hpp"
#include "dipolelets/render.hpp"
#include "dipolelets/simulate.hpp"
#include "dipolelets/solvers.hpp"
#include "dipolelets/transform.hpp"
#include "dipolelets/version.hpp"
#include "dipolelets/volume.hpp"
#include "dipolelets/volume_io.hpp"
#include "dipolelets/weights.hpp"
#include "dipolelets/window.hpp"
