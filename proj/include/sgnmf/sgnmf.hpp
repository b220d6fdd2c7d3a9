#pragma once

#include "sgnmf/config.hpp"
#include "sgnmf/datasets.hpp"
#include "sgnmf/error.hpp"
#include "sgnmf/experiment.hpp"
#include "sgnmf/factorization.hpp"
#include "sgnmf/graph.hpp"
#include "sgnmf/metrics.hpp"
#include "sgnmf/planted.hpp"
#include "sgnmf/random.hpp"
#include "sgnmf/report.hpp"
#include "sgnmf/version.hpp"
