use std::sync::mpsc::{channel, Receiver, Sender};
use std::thread::{Scope, ScopedJoinHandle};

use super::worker::{Command, Reply, Worker};

/// A set of workers the coordinator can broadcast to. `broadcast` returns
/// only once every worker has answered, in worker-id order.
pub(crate) trait Team {
    fn broadcast(&mut self, cmd: &Command, replies: &mut Vec<Reply>);
}

/// Reference realization: workers are stepped one after another on the
/// calling thread.
pub(crate) struct SequentialTeam<'a> {
    workers: Vec<Worker<'a>>,
}

impl<'a> SequentialTeam<'a> {
    pub(crate) fn new(workers: Vec<Worker<'a>>) -> Self {
        SequentialTeam { workers }
    }
}

impl Team for SequentialTeam<'_> {
    fn broadcast(&mut self, cmd: &Command, replies: &mut Vec<Reply>) {
        replies.clear();
        replies.extend(self.workers.iter_mut().map(|w| w.handle(cmd)));
    }
}

struct Link {
    commands: Sender<Command>,
    replies: Receiver<Reply>,
}

/// One OS thread per worker, fed over channels.
pub(crate) struct ThreadTeam<'scope> {
    links: Vec<Link>,
    handles: Vec<ScopedJoinHandle<'scope, ()>>,
}

impl<'scope> ThreadTeam<'scope> {
    pub(crate) fn spawn<'env>(
        scope: &'scope Scope<'scope, 'env>,
        workers: Vec<Worker<'env>>,
    ) -> Self
    where
        'env: 'scope,
    {
        let mut links = Vec::with_capacity(workers.len());
        let mut handles = Vec::with_capacity(workers.len());
        for mut worker in workers {
            let (cmd_tx, cmd_rx) = channel::<Command>();
            let (reply_tx, reply_rx) = channel::<Reply>();
            handles.push(scope.spawn(move || {
                for cmd in cmd_rx {
                    if reply_tx.send(worker.handle(&cmd)).is_err() {
                        break;
                    }
                }
            }));
            links.push(Link {
                commands: cmd_tx,
                replies: reply_rx,
            });
        }
        ThreadTeam { links, handles }
    }

    pub(crate) fn shutdown(self) {
        drop(self.links);
        for h in self.handles {
            if let Err(panic) = h.join() {
                std::panic::resume_unwind(panic);
            }
        }
    }
}

impl Team for ThreadTeam<'_> {
    fn broadcast(&mut self, cmd: &Command, replies: &mut Vec<Reply>) {
        replies.clear();
        for link in &self.links {
            link.commands
                .send(cmd.clone())
                .expect("worker thread alive");
        }
        for link in &self.links {
            replies.push(link.replies.recv().expect("worker thread alive"));
        }
    }
}
