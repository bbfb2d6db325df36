#pragma once

#include "surgecorr/core.hpp"
#include "surgecorr/nn/activation.hpp"
#include "surgecorr/nn/adam.hpp"
#include "surgecorr/nn/gradcheck.hpp"
#include "surgecorr/nn/layers.hpp"
#include "surgecorr/nn/network.hpp"
#include "surgecorr/pipeline/csv_io.hpp"
#include "surgecorr/pipeline/scaler.hpp"
#include "surgecorr/pipeline/series.hpp"
#include "surgecorr/pipeline/windows.hpp"
#include "surgecorr/model/correction.hpp"
#include "surgecorr/model/grid_search.hpp"
#include "surgecorr/model/model_file.hpp"
#include "surgecorr/model/scenario.hpp"
#include "surgecorr/model/trainer.hpp"
#include "surgecorr/eval/metrics.hpp"
#include "surgecorr/eval/report.hpp"
#include "surgecorr/eval/wilcoxon.hpp"
#include "surgecorr/synth/generator.hpp"
