use super::{apply_binop, BinOp, Binding, Expr, ExprError, Func};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Slot(usize),
    Neg,
    Bin(BinOp),
    Call(Func),
}

/// An expression lowered to a postfix program over numbered slots.
///
/// Parameters are substituted at compile time; the remaining identifiers
/// must be listed in `slots` and are read by position at evaluation. The
/// arithmetic is the same as [`Expr::evaluate`], operation for operation, so
/// both paths give identical bits.
#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    ops: Vec<Op>,
    depth: usize,
}

impl Compiled {
    pub fn new(e: &Expr, slots: &[&str], params: &Binding) -> Result<Self, ExprError> {
        let mut ops = Vec::new();
        lower(e, slots, params, &mut ops)?;
        let mut depth = 0usize;
        let mut max_depth = 0usize;
        for op in &ops {
            match op {
                Op::Const(_) | Op::Slot(_) => depth += 1,
                Op::Bin(_) => depth -= 1,
                Op::Neg | Op::Call(_) => {}
            }
            max_depth = max_depth.max(depth);
        }
        Ok(Compiled { ops, depth: max_depth })
    }

    pub fn eval(&self, values: &[f64]) -> Result<f64, ExprError> {
        let mut stack: smallstack::Stack = smallstack::Stack::with_capacity(self.depth);
        for op in &self.ops {
            match *op {
                Op::Const(v) => stack.push(v),
                Op::Slot(i) => stack.push(values[i]),
                Op::Neg => {
                    let v = stack.pop();
                    stack.push(-v);
                }
                Op::Bin(b) => {
                    let r = stack.pop();
                    let l = stack.pop();
                    stack.push(apply_binop(b, l, r)?);
                }
                Op::Call(f) => {
                    let v = stack.pop();
                    stack.push(f.apply(v)?);
                }
            }
        }
        Ok(stack.pop())
    }
}

fn lower(e: &Expr, slots: &[&str], params: &Binding, ops: &mut Vec<Op>) -> Result<(), ExprError> {
    match e {
        Expr::Num(v) => ops.push(Op::Const(*v)),
        Expr::Ident(name) => {
            if let Some(i) = slots.iter().position(|s| s == name) {
                ops.push(Op::Slot(i));
            } else if let Some(v) = params.get(name) {
                ops.push(Op::Const(v));
            } else {
                return Err(ExprError::Unbound(name.clone()));
            }
        }
        Expr::Neg(inner) => {
            lower(inner, slots, params, ops)?;
            ops.push(Op::Neg);
        }
        Expr::Binary(op, l, r) => {
            lower(l, slots, params, ops)?;
            lower(r, slots, params, ops)?;
            ops.push(Op::Bin(*op));
        }
        Expr::Call(f, arg) => {
            lower(arg, slots, params, ops)?;
            ops.push(Op::Call(*f));
        }
    }
    Ok(())
}

mod smallstack {
    // Fixed inline buffer; most right-hand sides need fewer than 16 slots.
    pub struct Stack {
        inline: [f64; 16],
        spill: Vec<f64>,
        len: usize,
    }

    impl Stack {
        pub fn with_capacity(n: usize) -> Self {
            Stack { inline: [0.0; 16], spill: if n > 16 { Vec::with_capacity(n - 16) } else { Vec::new() }, len: 0 }
        }

        pub fn push(&mut self, v: f64) {
            if self.len < 16 {
                self.inline[self.len] = v;
            } else {
                self.spill.push(v);
            }
            self.len += 1;
        }

        pub fn pop(&mut self) -> f64 {
            self.len -= 1;
            if self.len < 16 {
                self.inline[self.len]
            } else {
                self.spill.pop().unwrap()
            }
        }
    }
}
