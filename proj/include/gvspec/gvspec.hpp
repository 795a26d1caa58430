#pragma once

#include "gvspec/engine.hpp"
#include "gvspec/error.hpp"
#include "gvspec/fourier.hpp"
#include "gvspec/io.hpp"
#include "gvspec/peaks.hpp"
#include "gvspec/preprocess.hpp"
#include "gvspec/significance.hpp"
#include "gvspec/stats.hpp"
#include "gvspec/timeseries.hpp"
