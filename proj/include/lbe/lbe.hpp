#pragma once

#include <lbe/analysis.hpp>
#include <lbe/canonical.hpp>
#include <lbe/cases.hpp>
#include <lbe/error.hpp>
#include <lbe/expr.hpp>
#include <lbe/model_file.hpp>
#include <lbe/narmax.hpp>
#include <lbe/run.hpp>
