#pragma once

#include "kpcaig/baselines.hpp"
#include "kpcaig/config.hpp"
#include "kpcaig/curves.hpp"
#include "kpcaig/dataset.hpp"
#include "kpcaig/error.hpp"
#include "kpcaig/importance.hpp"
#include "kpcaig/io.hpp"
#include "kpcaig/kernel.hpp"
#include "kpcaig/kpca.hpp"
#include "kpcaig/metrics.hpp"
#include "kpcaig/synthetic.hpp"
