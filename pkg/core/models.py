from django.db import models
from django.utils import timezone


class ExperimentRun(models.Model):
    """One invocation of play, tournament, sweep or tune"""
    KIND_CHOICES = [
        ('play', 'Single game'),
        ('tournament', 'Round robin'),
        ('sweep', 'Accuracy sweep'),
        ('tune', 'NTBEA tuning'),
    ]
    STATUS_CHOICES = [
        ('running', 'Running'),
        ('complete', 'Complete'),
        ('interrupted', 'Interrupted'),
        ('failed', 'Failed'),
    ]

    kind = models.CharField(max_length=10, choices=KIND_CHOICES)
    # 64-bit unsigned seeds do not fit a signed BIGINT
    seed = models.CharField(max_length=20)
    config = models.JSONField(default=dict, help_text="Resolved experiment config")
    output_dir = models.CharField(max_length=500, blank=True)
    status = models.CharField(max_length=12, choices=STATUS_CHOICES, default='running')
    started_at = models.DateTimeField(default=timezone.now)
    finished_at = models.DateTimeField(null=True, blank=True)
    summary = models.JSONField(default=dict, blank=True)

    class Meta:
        ordering = ['-started_at']

    def __str__(self):
        return f"{self.kind} #{self.pk} (seed {self.seed}, {self.status})"

    def finish(self, status='complete', summary=None):
        self.status = status
        self.finished_at = timezone.now()
        if summary is not None:
            self.summary = summary
        self.save(update_fields=['status', 'finished_at', 'summary'])

    @property
    def duration(self):
        if self.finished_at is None:
            return None
        return self.finished_at - self.started_at


class GameResult(models.Model):
    """Outcome of one game played during a run"""
    WINNER_CHOICES = [
        ('Blue', 'Blue'),
        ('Red', 'Red'),
        ('Draw', 'Draw'),
    ]

    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='games')
    map_id = models.IntegerField()
    seed = models.CharField(max_length=20)
    blue_agent = models.CharField(max_length=100)
    red_agent = models.CharField(max_length=100)
    winner = models.CharField(max_length=4, choices=WINNER_CHOICES)
    score_blue = models.FloatField(help_text="Material advantage of Blue at the end")
    ticks = models.IntegerField()
    decisions_blue = models.IntegerField(default=0)
    decisions_red = models.IntegerField(default=0)
    decision_ms_blue = models.FloatField(default=0.0, help_text="Mean wall time per Blue decision")
    decision_ms_red = models.FloatField(default=0.0, help_text="Mean wall time per Red decision")

    class Meta:
        ordering = ['run', 'id']
        indexes = [
            models.Index(fields=['blue_agent', 'red_agent'], name='game_agents_idx'),
        ]

    def __str__(self):
        return f"{self.blue_agent} vs {self.red_agent} on map {self.map_id}: {self.winner}"

    @classmethod
    def from_record(cls, run, record):
        return cls(
            run=run,
            map_id=record.map_id,
            seed=str(record.seed),
            blue_agent=record.blue,
            red_agent=record.red,
            winner=record.winner.value,
            score_blue=record.score_blue,
            ticks=record.ticks,
            decisions_blue=record.decisions_blue,
            decisions_red=record.decisions_red,
            decision_ms_blue=record.decision_ms_blue,
            decision_ms_red=record.decision_ms_red,
        )
