#pragma once

#include <collide/logspace.hpp>
#include <collide/cache_model.hpp>
#include <collide/cache_sim.hpp>
#include <collide/seeding.hpp>
#include <collide/switch_model.hpp>
#include <collide/render.hpp>
#include <collide/cli.hpp>
