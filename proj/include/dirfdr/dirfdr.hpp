#pragma once

#include "dirfdr/errors.hpp"
#include "dirfdr/null_models.hpp"
#include "dirfdr/decision.hpp"
#include "dirfdr/rng.hpp"
#include "dirfdr/classical.hpp"
#include "dirfdr/mixture.hpp"
#include "dirfdr/zdirect.hpp"
#include "dirfdr/oracle.hpp"
#include "dirfdr/simulation.hpp"
#include "dirfdr/io.hpp"
#include "dirfdr/report.hpp"
