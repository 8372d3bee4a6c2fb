use std::process::ExitCode;

fn main() -> ExitCode {
    hswitch::commands::main_entry()
}
