use std::sync::Arc;

use crate::robots::{apply_actuations, RobotDescriptor};
use crate::sim::World;

use super::controller::{apply_grasp_action, start_skill, tick_skill, Progress, SkillState};
use super::spec::{EndState, SkillInvocation, SkillOutcome, SkillStatus};

/// Runs `chain` on one executor until it finishes or a skill fails.
///
/// A skill that terminates on tick `k` hands over to the next skill on the
/// same tick; the first non-success stops the chain.
pub fn run_skill_chain(
    chain: &[SkillInvocation],
    descriptor: &Arc<RobotDescriptor>,
    mut world: World,
) -> (Vec<SkillOutcome>, World) {
    let mut outcomes = Vec::new();
    let mut next = 0;
    let mut current: Option<SkillState> = None;
    loop {
        let state = match current.take() {
            Some(s) => s,
            None => {
                let Some(inv) = chain.get(next) else { break };
                next += 1;
                match start_skill(inv, descriptor.clone(), &world) {
                    Ok(s) => s,
                    Err(e) => {
                        outcomes.push(rejected(inv, &world, e.to_string()));
                        break;
                    }
                }
            }
        };
        let out = tick_skill(&state, &world);
        if let Progress::Terminal(o) = out.progress {
            let ok = o.status.is_success();
            outcomes.push(o);
            if !ok {
                break;
            }
            continue;
        }
        if let Some(action) = &out.grasp {
            if let Err(e) = apply_grasp_action(&mut world, &descriptor.id, action) {
                outcomes.push(out.state.abort(&world, format!("grasp: {e}")));
                break;
            }
        }
        let commands = match apply_actuations(descriptor, &out.commands, &world) {
            Ok(a) => a.commands,
            Err(e) => {
                outcomes.push(out.state.abort(&world, format!("actuation: {e}")));
                break;
            }
        };
        if let Err(e) = world.step(&commands) {
            outcomes.push(out.state.abort(&world, format!("simulation: {e}")));
            break;
        }
        current = Some(out.state);
    }
    (outcomes, world)
}

/// Outcome for an invocation that never started.
pub fn rejected(inv: &SkillInvocation, world: &World, reason: String) -> SkillOutcome {
    SkillOutcome {
        skill: inv.skill,
        executor: inv.executor.clone(),
        status: SkillStatus::Failed(reason),
        end_state: EndState::capture(world, &inv.executor, inv.id("object"), inv.id("articulation"), None, None),
        ticks_used: 0,
    }
}
