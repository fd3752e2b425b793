//! Static upper bound on the steps a plan can take.

use crate::lang::{Body, CallExpr, Condition, Operand, Program, Statement};
use crate::skills::{SkillRef, SkillRegistry};

/// Upper bound on executor steps for `program`, counting one step per
/// statement executed at any skill depth. `None` if a skill is unknown or
/// skills call each other recursively.
pub fn step_bound(program: &Program, registry: &SkillRegistry) -> Option<u64> {
    body_bound(&program.body, registry, &mut Vec::new())
}

fn body_bound<'r>(body: &Body, reg: &'r SkillRegistry, stack: &mut Vec<&'r str>) -> Option<u64> {
    body.statements()
        .iter()
        .try_fold(0u64, |acc, s| acc.checked_add(stmt_bound(s, reg, stack)?))
}

fn stmt_bound<'r>(stmt: &Statement, reg: &'r SkillRegistry, stack: &mut Vec<&'r str>) -> Option<u64> {
    let inner = match stmt {
        Statement::Call(c) | Statement::Assign { call: c, .. } => call_bound(c, reg, stack)?,
        Statement::Return(_) | Statement::Replan => 0,
        Statement::Loop { count, body } => u64::from(*count).checked_mul(body_bound(body, reg, stack)?)?,
        Statement::If { cond, body } => cond_bound(cond, reg, stack)?.checked_add(body_bound(body, reg, stack)?)?,
    };
    inner.checked_add(1)
}

fn cond_bound<'r>(cond: &Condition, reg: &'r SkillRegistry, stack: &mut Vec<&'r str>) -> Option<u64> {
    cond.operands().into_iter().try_fold(0u64, |acc, op| match op {
        Operand::Call(c) => acc.checked_add(call_bound(c, reg, stack)?),
        Operand::Term(_) => Some(acc),
    })
}

fn call_bound<'r>(call: &CallExpr, reg: &'r SkillRegistry, stack: &mut Vec<&'r str>) -> Option<u64> {
    match reg.resolve(&call.callee)? {
        SkillRef::Low(_) => Some(0),
        SkillRef::High(h) => {
            if stack.contains(&h.name.as_str()) {
                return None;
            }
            stack.push(&h.name);
            let b = body_bound(&h.definition.body, reg, stack);
            stack.pop();
            b
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_program, ParseMode};
    use crate::skills::default_registry;

    fn bound(plan: &str) -> Option<u64> {
        step_bound(&parse_program(plan, ParseMode::Plan).unwrap(), &default_registry())
    }

    #[test]
    fn bounds() {
        assert_eq!(bound("tc(90);mf(10)"), Some(2));
        assert_eq!(bound("3{tc(1);2{tu(1)}}"), Some(1 + 3 * (1 + 1 + 2)));
        // scan: loop(1) + 8 * (assign + if(1 + return)) + tc, then return.
        assert_eq!(bound("s('x')"), Some(1 + 1 + 8 * (1 + 2 + 1) + 1));
        assert_eq!(bound("zz(1)"), None);
    }
}
